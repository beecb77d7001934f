// Copyright 2026 The DSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dsc/errors.hpp"

namespace dsc {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

// One key=value with its location, for error messages.
struct Entry {
  std::string value;
  std::string where;  // "section.key"
};

[[noreturn]] void bad(const Entry& e, const std::string& what) {
  throw ConfigError(e.where + ": " + what + " (got '" + e.value + "')");
}

long long parse_integer(const Entry& e, long long lo) {
  long long v = 0;
  const auto* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(e, "expected an integer");
  if (v < lo) bad(e, "must be at least " + std::to_string(lo));
  return v;
}

double parse_real(const Entry& e) {
  double v = 0;
  const auto* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad(e, "expected a finite number");
  return v;
}

double parse_step(const Entry& e) {
  const double v = parse_real(e);
  if (!(v > 0 && v <= 1)) bad(e, "must lie in (0, 1]");
  return v;
}

bool parse_flag(const Entry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "off" || e.value == "0") return false;
  bad(e, "expected true or false");
}

// "K" or "HxW".
std::pair<std::size_t, std::size_t> parse_pair(const Entry& whole, const std::string& item) {
  const Entry e{item, whole.where};
  const auto x = item.find('x');
  if (x == std::string::npos) {
    const auto v = static_cast<std::size_t>(parse_integer(e, 1));
    return {v, v};
  }
  const auto h = static_cast<std::size_t>(parse_integer({item.substr(0, x), whole.where}, 1));
  const auto w = static_cast<std::size_t>(parse_integer({item.substr(x + 1), whole.where}, 1));
  return {h, w};
}

using Section = std::map<std::string, Entry>;

class SectionReader {
 public:
  SectionReader(const std::string& name, Section entries) : name_(name), entries_(std::move(entries)) {}

  const Entry* get(const std::string& key) {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const Entry& require(const std::string& key) {
    const Entry* e = get(key);
    if (!e) throw ConfigError(name_ + "." + key + ": missing required key");
    return *e;
  }
  void reject_unknown() const {
    for (const auto& [key, e] : entries_) {
      if (!used_.count(key)) throw ConfigError(e.where + ": unknown key");
    }
  }

 private:
  std::string name_;
  Section entries_;
  std::set<std::string> used_;
};

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(items[i].first) + "x" + std::to_string(items[i].second);
  }
  return out;
}

LayerSpec parse_layer(const std::string& name, SectionReader& r) {
  LayerSpec l;
  l.name = name;
  const Entry& branch = r.require("branch");
  try {
    l.branch = parse_branch(branch.value);
  } catch (const ConfigError&) {
    bad(branch, "expected vision, text or joint");
  }
  const Entry& parents = r.require("parents");
  l.parents = split(parents.value, ',');
  for (const auto& p : l.parents) {
    if (p.empty()) bad(parents, "empty parent name");
  }
  l.features = static_cast<std::size_t>(parse_integer(r.require("features"), 1));

  const Entry& kernel = r.require("kernel");
  for (const auto& item : split(kernel.value, ',')) {
    const auto [h, w] = parse_pair(kernel, item);
    l.kernels.push_back({h, w});
  }
  if (l.kernels.size() != l.parents.size()) bad(kernel, "need one kernel size per parent");

  if (const Entry* stride = r.get("stride")) {
    for (const auto& item : split(stride->value, ',')) {
      const auto [y, x] = parse_pair(*stride, item);
      l.strides.push_back({y, x});
    }
    if (l.strides.size() != l.parents.size()) bad(*stride, "need one stride per parent");
  } else {
    l.strides.assign(l.parents.size(), Stride{});
  }

  if (const Entry* e = r.get("lambda")) {
    l.lambda = parse_real(*e);
    if (l.lambda < 0) bad(*e, "must be nonnegative");
  }
  if (const Entry* e = r.get("nonnegative")) l.nonnegative = parse_flag(*e);
  if (const Entry* e = r.get("lr_scale")) {
    l.lr_scale = parse_real(*e);
    if (l.lr_scale < 0) bad(*e, "must be nonnegative");
  }
  if (const Entry* e = r.get("parent_weights")) {
    for (const auto& item : split(e->value, ',')) {
      const double w = parse_real({item, e->where});
      if (!(w > 0)) bad(*e, "weights must be positive");
      l.parent_weights.push_back(w);
    }
    if (l.parent_weights.size() != l.parents.size()) bad(*e, "need one weight per parent");
  }
  if (const Entry* e = r.get("iterations")) l.iterations = static_cast<int>(parse_integer(*e, 1));
  if (const Entry* e = r.get("dt_over_tau")) l.dt_over_tau = parse_step(*e);
  r.reject_unknown();
  return l;
}

}  // namespace

ModelConfig parse_config(const std::string& text, const std::string& source) {
  std::vector<std::pair<std::string, Section>> sections;
  std::set<std::string> seen_sections;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    const std::string loc = source + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(loc + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(loc + ": empty section name");
      if (!seen_sections.insert(name).second) throw ConfigError(loc + ": duplicate section [" + name + "]");
      sections.emplace_back(name, Section{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(loc + ": expected key = value");
    if (sections.empty()) throw ConfigError(loc + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(loc + ": empty key");
    auto& [section, entries] = sections.back();
    if (!entries.emplace(key, Entry{trim(line.substr(eq + 1)), section + "." + key}).second) {
      throw ConfigError(loc + ": duplicate key '" + key + "'");
    }
  }

  ModelConfig config;
  for (auto& [name, entries] : sections) {
    if (name != "solver") continue;
    SectionReader r(name, std::move(entries));
    if (const Entry* e = r.get("iterations")) config.solver.iterations = static_cast<int>(parse_integer(*e, 1));
    if (const Entry* e = r.get("dt_over_tau")) {
      config.solver.dt_over_tau = parse_step(*e);
    }
    if (const Entry* e = r.get("feedback")) config.solver.feedback = parse_flag(*e);
    if (const Entry* e = r.get("feedback_scale")) {
      config.solver.feedback_scale = parse_real(*e);
      if (config.solver.feedback_scale < 0) bad(*e, "must be nonnegative");
    }
    if (const Entry* e = r.get("threshold")) {
      if (e->value == "soft") {
        config.solver.threshold = ThresholdKind::kSoft;
      } else if (e->value == "hard") {
        config.solver.threshold = ThresholdKind::kHard;
      } else {
        bad(*e, "expected soft or hard");
      }
    }
    r.reject_unknown();
  }
  for (auto& [name, entries] : sections) {
    if (name == "solver") continue;
    if (name == "training") {
      SectionReader r(name, std::move(entries));
      auto& t = config.training;
      if (const Entry* e = r.get("epochs")) t.epochs = static_cast<int>(parse_integer(*e, 0));
      if (const Entry* e = r.get("learning_rate")) {
        t.learning_rate = parse_real(*e);
        if (t.learning_rate < 0) bad(*e, "must be nonnegative");
      }
      if (const Entry* e = r.get("update_every")) t.update_every = static_cast<int>(parse_integer(*e, 1));
      if (const Entry* e = r.get("seed")) t.seed = static_cast<std::uint64_t>(parse_integer(*e, 0));
      r.reject_unknown();
    } else if (name.rfind("layer:", 0) == 0) {
      const std::string layer = trim(name.substr(6));
      if (layer.empty() || layer == kExternal) throw ConfigError("[" + name + "]: invalid layer name");
      SectionReader r(name, std::move(entries));
      config.layers.push_back(parse_layer(layer, r));
    } else {
      throw ConfigError(source + ": unknown section [" + name + "]");
    }
  }
  if (config.layers.empty()) throw ConfigError(source + ": no [layer:NAME] sections");
  validate_config(config);
  return config;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_string(const ModelConfig& c) {
  std::ostringstream out;
  out << "[solver]\n"
      << "iterations = " << c.solver.iterations << '\n'
      << "dt_over_tau = " << format_real(c.solver.dt_over_tau) << '\n'
      << "feedback = " << (c.solver.feedback ? "true" : "false") << '\n'
      << "feedback_scale = " << format_real(c.solver.feedback_scale) << '\n'
      << "threshold = " << (c.solver.threshold == ThresholdKind::kSoft ? "soft" : "hard") << '\n'
      << "\n[training]\n"
      << "epochs = " << c.training.epochs << '\n'
      << "learning_rate = " << format_real(c.training.learning_rate) << '\n'
      << "update_every = " << c.training.update_every << '\n'
      << "seed = " << c.training.seed << '\n';
  for (const auto& l : c.layers) {
    std::vector<std::pair<std::size_t, std::size_t>> kernels, strides;
    for (const auto& k : l.kernels) kernels.emplace_back(k.h, k.w);
    for (const auto& s : l.strides) strides.emplace_back(s.y, s.x);
    out << "\n[layer:" << l.name << "]\n"
        << "branch = " << branch_name(l.branch) << '\n'
        << "parents = ";
    for (std::size_t i = 0; i < l.parents.size(); ++i) out << (i ? ", " : "") << l.parents[i];
    out << '\n'
        << "features = " << l.features << '\n'
        << "kernel = " << join_pairs(kernels) << '\n'
        << "stride = " << join_pairs(strides) << '\n'
        << "lambda = " << format_real(l.lambda) << '\n'
        << "nonnegative = " << (l.nonnegative ? "true" : "false") << '\n'
        << "lr_scale = " << format_real(l.lr_scale) << '\n';
    if (!l.parent_weights.empty()) {
      out << "parent_weights = ";
      for (std::size_t i = 0; i < l.parent_weights.size(); ++i) {
        out << (i ? ", " : "") << format_real(l.parent_weights[i]);
      }
      out << '\n';
    }
    if (l.iterations) out << "iterations = " << *l.iterations << '\n';
    if (l.dt_over_tau) out << "dt_over_tau = " << format_real(*l.dt_over_tau) << '\n';
  }
  return out.str();
}

LayerGraph build_graph(const ModelConfig& config, std::uint64_t seed) {
  std::map<std::string, const LayerSpec*> by_name;
  for (const auto& l : config.layers) by_name[l.name] = &l;
  const std::map<Branch, Shape> externals{{Branch::kVision, kImageShape}, {Branch::kText, kTextShape}};

  std::mt19937_64 rng(seed);
  std::vector<DictionaryLayer> layers;
  for (const auto& spec : config.layers) {
    DictionaryLayer l;
    l.name = spec.name;
    l.branch = spec.branch;
    l.parents = spec.parents;
    l.params.lambda = spec.lambda;
    l.params.dt_over_tau = spec.dt_over_tau.value_or(config.solver.dt_over_tau);
    l.params.n_iterations = spec.iterations.value_or(config.solver.iterations);
    l.params.nonnegative = spec.nonnegative;
    l.params.kind = config.solver.threshold;
    l.learning_rate_scale = spec.lr_scale;
    l.parent_weights = spec.parent_weights.empty() ? std::vector<double>(spec.parents.size(), 1.0)
                                                    : spec.parent_weights;
    for (std::size_t s = 0; s < spec.parents.size(); ++s) {
      std::size_t channels = 0;
      if (spec.parents[s] == kExternal) {
        if (spec.branch == Branch::kJoint) {
          throw ConfigError("layer '" + spec.name + "': the joint layer cannot read external input");
        }
        channels = externals.at(spec.branch)[0];
      } else {
        const auto it = by_name.find(spec.parents[s]);
        if (it == by_name.end()) {
          throw ConfigError("layer '" + spec.name + "': unknown parent '" + spec.parents[s] + "'");
        }
        channels = it->second->features;
      }
      l.kernels.push_back(KernelStack::random(spec.features, channels, spec.kernels[s].h, spec.kernels[s].w,
                                              spec.strides[s], rng));
    }
    layers.push_back(std::move(l));
  }
  try {
    return LayerGraph(std::move(layers), externals, config.solver.feedback, config.solver.feedback_scale);
  } catch (const GraphError& e) {
    throw ConfigError(e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(e.what());
  }
}

void validate_config(const ModelConfig& config) { build_graph(config, 0); }

}  // namespace dsc
