#include "deeppos/config.hpp"

#include <set>

#include <json.hpp>

#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"

namespace deeppos {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) fail(ErrorCode::parse, where + ": unknown key '" + key + "'");
}

Position read_point(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::parse, "expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

TrainConfig read_train(const json& j, const std::string& where) {
  reject_unknown(j,
                 {"dims", "max_epoch", "learning_rate", "optimizer", "rmsprop_decay", "adam_beta1",
                  "adam_beta2", "epsilon", "batch_size", "order", "init_std", "seed",
                  "early_stop", "early_stop_tolerance", "early_stop_window"},
                 where);
  TrainConfig c;
  if (j.contains("dims")) c.dims = j["dims"].get<EncoderDims>();
  c.max_epoch = j.value("max_epoch", c.max_epoch);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("optimizer")) c.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
  c.rmsprop_decay = j.value("rmsprop_decay", c.rmsprop_decay);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  if (j.contains("order")) {
    const auto o = j["order"].get<std::string>();
    if (o == "shuffled") c.order = BatchOrder::shuffled;
    else if (o == "sp_major") c.order = BatchOrder::sp_major;
    else fail(ErrorCode::parse, where + ": order must be 'shuffled' or 'sp_major'");
  }
  c.init_std = j.value("init_std", c.init_std);
  c.seed = j.value("seed", c.seed);
  c.early_stop = j.value("early_stop", c.early_stop);
  c.early_stop_tolerance = j.value("early_stop_tolerance", c.early_stop_tolerance);
  c.early_stop_window = j.value("early_stop_window", c.early_stop_window);
  validate_config(c);
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& source_name) {
  ScenarioConfig s;
  try {
    const json j = json::parse(json_text);
    reject_unknown(j,
                   {"name", "width", "height", "ap_position", "carrier_frequency",
                    "subcarrier_spacing", "path_loss_exponent", "scatterer_positions",
                    "reflection_magnitude", "noise_std", "antenna_offsets", "antenna_directivity",
                    "antenna_boresight0", "walls", "rng_seed", "grid", "train"},
                   source_name);
    auto& env = s.environment;
    s.name = j.value("name", std::string{});
    env.width = j.at("width").get<double>();
    env.height = j.at("height").get<double>();
    env.ap_position = read_point(j.at("ap_position"));
    env.carrier_frequency = j.value("carrier_frequency", env.carrier_frequency);
    env.subcarrier_spacing = j.value("subcarrier_spacing", env.subcarrier_spacing);
    env.path_loss_exponent = j.value("path_loss_exponent", env.path_loss_exponent);
    if (j.contains("scatterer_positions"))
      for (const auto& p : j["scatterer_positions"]) env.scatterer_positions.push_back(read_point(p));
    env.reflection_magnitude = j.value("reflection_magnitude", env.reflection_magnitude);
    env.noise_std = j.value("noise_std", env.noise_std);
    if (j.contains("antenna_offsets")) {
      const auto& offs = j["antenna_offsets"];
      if (!offs.is_array() || offs.size() != kAntennaCount)
        fail(ErrorCode::parse, source_name + ": antenna_offsets needs exactly 3 entries");
      for (std::size_t a = 0; a < kAntennaCount; ++a)
        env.antenna_offsets[a] = {offs[a].value("gain", 1.0), offs[a].value("phase", 0.0)};
    }
    env.antenna_directivity = j.value("antenna_directivity", env.antenna_directivity);
    env.antenna_boresight0 = j.value("antenna_boresight0", env.antenna_boresight0);
    if (j.contains("walls"))
      for (const auto& w : j["walls"]) {
        if (!w.is_array() || w.size() != 2)
          fail(ErrorCode::parse, source_name + ": a wall is [[x1,y1],[x2,y2]]");
        env.walls.push_back({read_point(w[0]), read_point(w[1])});
      }
    env.rng_seed = j.value("rng_seed", env.rng_seed);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown(g, {"spacing", "packets_per_sp", "offset", "ap_exclusion_radius"},
                     source_name + " (grid)");
      s.grid.spacing = g.value("spacing", s.grid.spacing);
      s.grid.packets_per_sp = g.value("packets_per_sp", s.grid.packets_per_sp);
      s.grid.offset = g.value("offset", s.grid.offset);
      s.grid.ap_exclusion_radius = g.value("ap_exclusion_radius", s.grid.ap_exclusion_radius);
    }
    if (j.contains("train")) s.train = read_train(j["train"], source_name + " (train)");
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, source_name + ": " + e.what());
  }
  validate_environment(s.environment);
  return s;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.string());
}

TrainConfig parse_train_config(const std::string& json_text, const std::string& source_name) {
  try {
    const json j = json::parse(json_text);
    if (j.contains("train")) return read_train(j["train"], source_name + " (train)");
    return read_train(j, source_name);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, source_name + ": " + e.what());
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return parse_train_config(read_text_file(path), path.string());
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["dims"] = c.dims;
  j["max_epoch"] = c.max_epoch;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = std::string(to_string(c.optimizer));
  j["rmsprop_decay"] = c.rmsprop_decay;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["epsilon"] = c.epsilon;
  j["batch_size"] = c.batch_size;
  j["order"] = c.order == BatchOrder::shuffled ? "shuffled" : "sp_major";
  j["init_std"] = c.init_std;
  j["seed"] = c.seed;
  j["early_stop"] = c.early_stop;
  j["early_stop_tolerance"] = c.early_stop_tolerance;
  j["early_stop_window"] = c.early_stop_window;
  return j.dump(2) + "\n";
}

}  // namespace deeppos
