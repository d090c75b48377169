#include "cdgnet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cdgnet/errors.hpp"
#include "cdgnet/optim.hpp"

namespace cdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class U>
U parse_number(const std::string& key, const std::string& text) {
  U v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return v;
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

template <class U>
Setter set(U TrainConfig::*field) {
  return [field](TrainConfig& c, const std::string& k, const std::string& v) {
    c.*field = parse_number<U>(k, v);
  };
}

template <class U>
Setter set_model(U ModelConfig::*field) {
  return [field](TrainConfig& c, const std::string& k, const std::string& v) {
    c.model.*field = parse_number<U>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"channels", set_model(&ModelConfig::channels)},
      {"small_channels", set_model(&ModelConfig::small_channels)},
      {"reduction_ratio", set_model(&ModelConfig::reduction_ratio)},
      {"mu", set(&TrainConfig::mu)},
      {"lambda1",
       [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.weights.lambda1 = parse_number<double>(k, v);
       }},
      {"lambda2",
       [](TrainConfig& c, const std::string& k, const std::string& v) {
         c.weights.lambda2 = parse_number<double>(k, v);
       }},
      {"lr", set(&TrainConfig::lr)},
      {"lr_decay", set(&TrainConfig::lr_decay)},
      {"lr_step", set(&TrainConfig::lr_step)},
      {"epochs", set(&TrainConfig::epochs)},
      {"batch", set(&TrainConfig::batch)},
      {"crop", set(&TrainConfig::crop)},
      {"seed", set(&TrainConfig::seed)},
  };
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  weights.validate();
  if (!(mu >= 0 && mu <= 1)) throw ConfigError("mu must lie in [0, 1]");
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("lr_decay must lie in (0, 1]");
  if (lr_step < 1) throw ConfigError("lr_step must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (crop < 4 || crop % 4 != 0) throw ConfigError("crop must be a positive multiple of 4");
}

double TrainConfig::lr_for_epoch(int epoch) const { return lr_at(epoch, lr, lr_decay, lr_step); }

TrainConfig parse_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + " is not key=value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "channels=" << c.model.channels << "\nsmall_channels=" << c.model.small_channels
    << "\nreduction_ratio=" << c.model.reduction_ratio << "\nmu=" << c.mu
    << "\nlambda1=" << c.weights.lambda1 << "\nlambda2=" << c.weights.lambda2 << "\nlr=" << c.lr
    << "\nlr_decay=" << c.lr_decay << "\nlr_step=" << c.lr_step << "\nepochs=" << c.epochs
    << "\nbatch=" << c.batch << "\ncrop=" << c.crop << "\nseed=" << c.seed << "\n";
  return o.str();
}

}  // namespace cdg
