#include "deeppos/model_io.hpp"

#include <json.hpp>

#include "deeppos/error.hpp"
#include "deeppos/io_util.hpp"

namespace deeppos {

using nlohmann::ordered_json;

namespace {

ordered_json layer_to_json(const LayerParams& l) {
  ordered_json w = ordered_json::array();
  for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
  ordered_json b = ordered_json::array();
  for (Eigen::Index i = 0; i < l.biases.size(); ++i) b.push_back(l.biases(i));
  return {{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", w}, {"biases", b}};
}

LayerParams layer_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (rows < 1 || cols < 1 || w.size() != static_cast<std::size_t>(rows * cols) ||
      b.size() != static_cast<std::size_t>(rows))
    fail(ErrorCode::dimension_mismatch, "layer entry counts do not match its shape");
  LayerParams l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[k++].get<double>();
  for (Eigen::Index r = 0; r < rows; ++r) l.biases(r) = b[static_cast<std::size_t>(r)].get<double>();
  return l;
}

}  // namespace

std::string model_to_json(const SaeModel& model) {
  check_model(model);
  ordered_json j;
  j["format"] = "deeppos-sae-model";
  j["version"] = kModelFormatVersion;
  j["dims"] = model.dims();
  j["label_count"] = model.label_count;
  j["input_dim"] = kPacketLength;
  j["optimizer"] = model.optimizer;
  j["seed"] = model.seed;
  j["normalization"] = {{"min", model.normalization.min}, {"max", model.normalization.max}};
  ordered_json coords = ordered_json::array();
  for (const auto& c : model.sp_coordinates)
    coords.push_back({{"id", c.id}, {"x", c.position.x}, {"y", c.position.y}});
  j["sp_coordinates"] = coords;
  ordered_json hyper = ordered_json::object();
  for (const auto& [k, v] : model.hyperparameters) hyper[k] = v;
  j["hyperparameters"] = hyper;
  ordered_json enc = ordered_json::array();
  ordered_json dec = ordered_json::array();
  for (const auto& l : model.params.encoder) enc.push_back(layer_to_json(l));
  for (const auto& l : model.params.decoder) dec.push_back(layer_to_json(l));
  j["encoder"] = enc;
  j["decoder"] = dec;
  return j.dump(1) + "\n";
}

SaeModel model_from_json(const std::string& text, const std::string& source_name) {
  SaeModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "deeppos-sae-model")
      fail(ErrorCode::parse, source_name + ": not a model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      fail(ErrorCode::parse, source_name + ": unsupported model format version " +
                                 std::to_string(version));
    m.label_count = j.at("label_count").get<int>();
    m.optimizer = j.at("optimizer").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.normalization = {j.at("normalization").at("min").get<double>(),
                       j.at("normalization").at("max").get<double>()};
    for (const auto& c : j.at("sp_coordinates"))
      m.sp_coordinates.push_back(
          {c.at("id").get<int>(), {c.at("x").get<double>(), c.at("y").get<double>()}});
    if (j.contains("hyperparameters"))
      for (const auto& [k, v] : j["hyperparameters"].items())
        m.hyperparameters[k] = v.is_string() ? v.get<std::string>() : v.dump();
    const auto& enc = j.at("encoder");
    const auto& dec = j.at("decoder");
    if (enc.size() != 4 || dec.size() != 4)
      fail(ErrorCode::dimension_mismatch, source_name + ": expected 4 encoder and 4 decoder layers");
    for (std::size_t i = 0; i < 4; ++i) {
      m.params.encoder[i] = layer_from_json(enc[i]);
      m.params.decoder[i] = layer_from_json(dec[i]);
    }
    const auto dims = j.at("dims").get<EncoderDims>();
    if (dims != m.dims())
      fail(ErrorCode::dimension_mismatch, source_name + ": dims field disagrees with layer shapes");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, source_name + ": " + e.what());
  }
  check_model(m);
  return m;
}

void save_model(const SaeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

SaeModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path), path.string());
}

}  // namespace deeppos
