#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("deeppos_cli_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

struct Run {
  int exit_code = -1;
  std::string output;
};

Run run(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string("\"") + DEEPPOS_CLI_PATH + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

TEST(Cli, Version) {
  Scratch s("version");
  const auto r = run("--version", s.dir / "out.txt");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("deeppos 1.0.0"), std::string::npos);
}

TEST(Cli, NoSubcommandIsUsageError) {
  Scratch s("nosub");
  EXPECT_NE(run("", s.dir / "out.txt").exit_code, 0);
}

TEST(Cli, UnknownFlagFailsWithoutWritingFiles) {
  Scratch s("flag");
  const fs::path out = s.dir / "gen";
  const auto r = run("generate --env " DEEPPOS_CONFIG_DIR "/classroom.json --out \"" + out.string() +
                         "\" --frobnicate 3",
                     s.dir / "out.txt");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_FALSE(fs::exists(out / "fingerprints.csv"));
}

TEST(Cli, MissingInputIsRejected) {
  Scratch s("missing");
  const auto r = run("train --dataset \"" + (s.dir / "nope.csv").string() + "\"", s.dir / "out.txt");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find("nope.csv"), std::string::npos);
}

TEST(Cli, CorruptModelIsRuntimeError) {
  Scratch s("corrupt");
  std::ofstream(s.dir / "model.json") << "{\"format\": 3}";
  std::ofstream(s.dir / "p.csv") << "a0\n";
  const auto r = run("localize --model \"" + (s.dir / "model.json").string() + "\" --packets \"" +
                         (s.dir / "p.csv").string() + "\"",
                     s.dir / "out.txt");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("model.json"), std::string::npos);
}

TEST(Cli, GenerateTrainLocalizeEvaluate) {
  Scratch s("pipeline");
  const fs::path gen = s.dir / "gen";
  auto r = run("generate --env " DEEPPOS_CONFIG_DIR "/classroom.json --out \"" + gen.string() +
                   "\" --spacing 2 --packets 6",
               s.dir / "gen.txt");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const fs::path csv = gen / "fingerprints.csv";
  ASSERT_TRUE(fs::exists(csv));
  EXPECT_TRUE(fs::exists(gen / "fingerprints.meta.json"));
  EXPECT_EQ(count_lines(csv), 1u + 12u * 6u);

  const fs::path model = s.dir / "model.json";
  r = run("train --dataset \"" + csv.string() + "\" --config " DEEPPOS_CONFIG_DIR
          "/classroom.json --out \"" + model.string() + "\" --epochs 10",
          s.dir / "train.txt");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(model));
  EXPECT_EQ(count_lines(s.dir / "model.loss.csv"), 11u);

  r = run("localize --model \"" + model.string() + "\" --packets \"" + csv.string() + "\" --r 2",
          s.dir / "loc.txt");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("\"estimate\""), std::string::npos);

  const fs::path eval = s.dir / "eval";
  r = run("evaluate --dataset \"" + csv.string() + "\" --config " DEEPPOS_CONFIG_DIR
          "/classroom.json --out \"" + eval.string() + "\" --p 3 --epochs 5",
          s.dir / "eval.txt");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(count_lines(eval / "folds.csv"), 13u);
  EXPECT_TRUE(fs::exists(eval / "summary.txt"));
}

}  // namespace
