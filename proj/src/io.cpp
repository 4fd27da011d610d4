#include "trialmarket/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>

#include "trialmarket/error.hpp"

namespace trialmarket {

using nlohmann::json;

namespace {

Matrix matrix_from_json(const json& doc, const char* name) {
  if (!doc.is_array()) fail(ErrorKind::InvalidInstance, std::string(name) + " must be an array");
  std::vector<std::vector<double>> rows;
  for (const json& row : doc) {
    if (row.is_number()) {
      rows.push_back({row.get<double>()});
    } else {
      rows.push_back(row.get<std::vector<double>>());
    }
  }
  return Matrix::from_rows(rows);
}

template <typename T>
T field(const json& doc, const char* name) {
  if (!doc.contains(name)) fail(ErrorKind::InvalidInstance, std::string("missing field ") + name);
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInstance, std::string("bad field ") + name + ": " + e.what());
  }
}

std::string noise_name(AppealNoise noise) {
  return noise == AppealNoise::Multiplicative ? "multiplicative" : "additive";
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidInstance, "cannot parse " + path.string() + ": " + e.what());
  }
}

json config_to_json(const MarketConfig& config) {
  json doc;
  doc["num_items"] = config.num_items();
  doc["num_classes"] = config.num_classes();
  if (config.arrival_rates()) doc["arrival_rates"] = *config.arrival_rates();
  doc["class_weights"] = config.class_weights();
  doc["appeals"] = config.appeals().to_rows();
  doc["qualities"] = config.qualities().to_rows();
  doc["visibilities"] = config.visibilities();
  doc["z"] = config.no_trial_mass();
  if (config.appeal_check() == AppealCheck::NonNegative) doc["allow_zero_appeals"] = true;
  return doc;
}

MarketConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorKind::InvalidInstance, "market config must be a JSON object");
  Matrix appeals = matrix_from_json(field<json>(doc, "appeals"), "appeals");
  Matrix qualities = matrix_from_json(field<json>(doc, "qualities"), "qualities");
  auto visibilities = field<std::vector<double>>(doc, "visibilities");
  const double z = doc.contains("z") ? field<double>(doc, "z") : 0.0;
  const AppealCheck check = doc.contains("allow_zero_appeals") &&
                                    field<bool>(doc, "allow_zero_appeals")
                                ? AppealCheck::NonNegative
                                : AppealCheck::Positive;

  if (doc.contains("num_items") && field<std::size_t>(doc, "num_items") != visibilities.size()) {
    fail(ErrorKind::InvalidInstance, "num_items does not match the visibility vector");
  }
  std::optional<MarketConfig> config;
  if (doc.contains("arrival_rates")) {
    config = MarketConfig::from_arrival_rates(field<std::vector<double>>(doc, "arrival_rates"),
                                              std::move(appeals), std::move(qualities),
                                              std::move(visibilities), z, check);
  } else {
    config.emplace(field<std::vector<double>>(doc, "class_weights"), std::move(appeals),
                   std::move(qualities), std::move(visibilities), z, check);
  }
  if (doc.contains("num_classes") &&
      field<std::size_t>(doc, "num_classes") != config->num_classes()) {
    fail(ErrorKind::InvalidInstance, "num_classes does not match the class weights");
  }
  return *config;
}

json instance_to_json(const TwoClassLogitInstance& instance) {
  return json{{"V1", instance.v1},
              {"V2", instance.v2},
              {"revenues", instance.revenues},
              {"alpha", instance.alpha}};
}

TwoClassLogitInstance instance_from_json(const json& doc) {
  TwoClassLogitInstance instance;
  instance.v1 = field<std::vector<double>>(doc, "V1");
  instance.v2 = field<std::vector<double>>(doc, "V2");
  instance.revenues = field<std::vector<double>>(doc, "revenues");
  instance.alpha = field<double>(doc, "alpha");
  instance.validate();
  return instance;
}

json report_to_json(const AsymptoticReport& report) {
  auto opt = [](const auto& value) -> json {
    if (!value) return nullptr;
    return json(*value);
  };
  auto item = [](const std::optional<std::size_t>& value) -> json {
    if (!value) return nullptr;
    return json(*value + 1);
  };
  json doc;
  doc["p_aqgsi"] = opt(report.p_aqgsi);
  doc["p_aqnsi"] = opt(report.p_aqnsi);
  doc["p_sqssi"] = opt(report.p_sqssi);
  doc["p_sqnsi"] = opt(report.p_sqnsi);
  doc["ratio_sqssi_aqgsi"] = opt(report.ratio_sqssi_aqgsi);
  doc["ratio_aqnsi_aqgsi"] = opt(report.ratio_aqnsi_aqgsi);
  doc["monopoly_item_aq"] = item(report.monopoly_aq);
  json per_class = json::array();
  for (const auto& m : report.monopoly_sq) per_class.push_back(item(m));
  doc["monopoly_item_sq"] = per_class;
  doc["global_tie_breaking"] = report.global_tie_breaking;
  doc["segmented_tie_breaking"] = report.segmented_tie_breaking;
  return doc;
}

FigureRequest request_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorKind::InvalidInstance, "experiment must be a JSON object");
  FigureRequest request;
  if (doc.contains("figure")) {
    request.figure = field<std::string>(doc, "figure");
  } else if (doc.contains("scheme")) {
    request.figure = "me-scheme" + std::to_string(field<int>(doc, "scheme"));
  } else {
    fail(ErrorKind::InvalidInstance, "experiment needs a figure or a scheme");
  }
  if (doc.contains("scheme") && plan_figure(request.figure).scheme != field<int>(doc, "scheme")) {
    fail(ErrorKind::InvalidInstance, "scheme does not match the figure id");
  }
  if (doc.contains("num_items")) request.scale.items = field<std::size_t>(doc, "num_items");
  if (doc.contains("horizon")) request.scale.horizon = field<std::int64_t>(doc, "horizon");
  if (doc.contains("replications")) {
    request.scale.replications = field<std::size_t>(doc, "replications");
  }
  if (doc.contains("seed")) request.seed = field<std::uint64_t>(doc, "seed");
  if (doc.contains("z")) request.z = field<double>(doc, "z");
  if (doc.contains("checkpoints")) request.checkpoints = field<std::size_t>(doc, "checkpoints");
  if (doc.contains("appeal_noise")) {
    const auto noise = field<std::string>(doc, "appeal_noise");
    if (noise == "multiplicative") {
      request.appeal_noise = AppealNoise::Multiplicative;
    } else if (noise == "additive") {
      request.appeal_noise = AppealNoise::Additive;
    } else {
      fail(ErrorKind::InvalidInstance, "appeal_noise must be multiplicative or additive");
    }
  }
  if (doc.contains("visibility_profile")) {
    const json& profile = doc.at("visibility_profile");
    if (profile.is_array()) {
      request.visibility.values = profile.get<std::vector<double>>();
    } else if (profile.is_number()) {
      request.visibility.exponent = profile.get<double>();
    } else if (profile.is_object()) {
      request.visibility.exponent = field<double>(profile, "exponent");
    } else {
      fail(ErrorKind::InvalidInstance, "visibility_profile must be an array, number or object");
    }
  }
  return request;
}

json request_to_json(const FigureRequest& request) {
  json doc;
  doc["figure"] = request.figure;
  doc["scheme"] = plan_figure(request.figure).scheme;
  doc["num_items"] = request.scale.items;
  doc["horizon"] = request.scale.horizon;
  doc["replications"] = request.scale.replications;
  doc["seed"] = request.seed;
  doc["z"] = request.z;
  doc["checkpoints"] = request.checkpoints;
  doc["appeal_noise"] = noise_name(request.appeal_noise);
  if (request.visibility.values.empty()) {
    doc["visibility_profile"] = json{{"type", "power"}, {"exponent", request.visibility.exponent}};
  } else {
    doc["visibility_profile"] = request.visibility.values;
  }
  return doc;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    hash ^= static_cast<unsigned char>(*it);
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

json manifest_json(std::uint64_t seed, const MarketConfig& config,
                   const std::vector<std::filesystem::path>& outputs) {
  json doc;
  doc["tool"] = "trialmarket";
  doc["version"] = kToolVersion;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  doc["timestamp"] = stamp;
  doc["seed"] = seed;
  doc["config"] = config_to_json(config);
  json files = json::array();
  for (const auto& path : outputs) {
    files.push_back({{"path", path.filename().string()}, {"fnv1a64", file_checksum(path)}});
  }
  doc["outputs"] = files;
  return doc;
}

}  // namespace trialmarket
