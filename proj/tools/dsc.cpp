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

// dsc: train, inspect and sample multimodal sparse-coding networks.
//
// Exit status: 0 success, 2 usage, configuration or input errors, 3 numeric
// divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsc/analysis.hpp"
#include "dsc/checkpoint.hpp"
#include "dsc/config.hpp"
#include "dsc/data.hpp"
#include "dsc/errors.hpp"
#include "dsc/learning.hpp"
#include "dsc/network.hpp"

namespace fs = std::filesystem;
using namespace dsc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- corpus selection ------------------------------------------------------

struct CorpusArgs {
  std::string corpus;
  std::optional<std::uint64_t> toy_seed;
  std::string images;
  std::string manifest;
  std::string split = "all";

  void add(CLI::App* app) {
    app->add_option("--corpus", corpus, "Corpus cache written by toy-gen or faces-gen");
    app->add_option("--toy-seed", toy_seed, "Generate the toy B/13 corpus with this seed");
    app->add_option("--images", images, "Directory of PNG images (with --manifest)");
    app->add_option("--manifest", manifest, "Lines 'relative/path.png<TAB>Label'");
    app->add_option("--split", split, "Samples to use: all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}));
  }

  bool given() const { return !corpus.empty() || toy_seed || !images.empty() || !manifest.empty(); }

  Corpus load() const {
    const int sources = !corpus.empty() + toy_seed.has_value() + (!images.empty() || !manifest.empty());
    if (sources != 1) throw UsageError("give exactly one of --corpus, --toy-seed or --images/--manifest");
    if (!corpus.empty()) return load_corpus(corpus);
    if (toy_seed) return generate_toy_corpus(*toy_seed);
    if (images.empty() || manifest.empty()) throw UsageError("--images and --manifest go together");
    return load_image_corpus(images, manifest);
  }

  std::vector<Sample> samples(const Corpus& c) const {
    if (split == "train") return c.train_samples();
    if (split == "test") return c.test_samples();
    return c.samples;
  }
};

// ---- single-input selection ----------------------------------------------

struct InputArgs {
  std::optional<std::size_t> index;
  bool probe = false;
  std::string image;
  std::optional<std::string> text_label;
  bool no_image = false;
  bool no_text = false;

  void add(CLI::App* app) {
    app->add_option("--index", index, "Use sample N of the corpus");
    app->add_flag("--probe", probe, "Use the corpus's ambiguous probe");
    app->add_option("--image", image, "PNG file for the vision input");
    app->add_option("--text", text_label, "Render this string as the text input");
    app->add_flag("--no-image", no_image, "Remove the vision branch");
    app->add_flag("--no-text", no_text, "Remove the text branch");
  }

  // The sample and which branches the user supplied.
  std::pair<Sample, BranchPresence> resolve(const std::optional<Corpus>& corpus) const {
    const int picks = index.has_value() + probe + !image.empty();
    if (picks > 1) throw UsageError("give at most one of --index, --probe or --image");
    Sample s{Tensor(kImageShape), Tensor(kTextShape), ""};
    BranchPresence presence{!no_image, !no_text};
    if (index || probe) {
      if (!corpus) throw UsageError("--index and --probe need a corpus");
      if (probe) {
        if (!corpus->probe) throw UsageError("this corpus has no probe");
        s = *corpus->probe;
        // The probe has no text of its own.
        presence.text = presence.text && text_label.has_value();
      } else {
        if (*index >= corpus->samples.size()) {
          throw UsageError("--index " + std::to_string(*index) + " is out of range (corpus has " +
                           std::to_string(corpus->samples.size()) + " samples)");
        }
        s = corpus->samples[*index];
      }
    } else {
      // Only what is given on the command line is present.
      presence.vision = presence.vision && !image.empty();
      presence.text = presence.text && text_label.has_value();
    }
    if (!image.empty()) s.image = to_face_image(load_png(image));
    if (text_label) s.text = render_text(*text_label);
    return {s, presence};
  }
};

std::map<std::string, std::map<std::string, std::vector<Tensor>>> train_codes(const LayerGraph& graph,
                                                                              const Corpus& corpus,
                                                                              BranchPresence presence, int threads) {
  const auto train = corpus.train_samples();
  std::map<std::string, std::map<std::string, std::vector<Tensor>>> out;
  for (const auto& layer : graph.layers()) {
    if (!presence.present(layer.branch)) continue;
    const auto codes = infer_codes(graph, train, layer.name, presence, threads);
    for (std::size_t i = 0; i < train.size(); ++i) out[layer.name][train[i].label].push_back(codes[i]);
  }
  return out;
}

void print_centroid(const std::string& what, const CentroidResult& r) {
  std::cout << "centroid " << what << " ->" << ' ' << r.label;
  for (const auto& [label, d] : r.distances) std::cout << "  " << label << '=' << fmt(d);
  std::cout << '\n';
}

// ---- verbs -------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string metrics;
  CorpusArgs corpus;
};

int run_train(const TrainArgs& a) {
  ModelConfig config = load_config(a.config);
  if (a.seed) config.training.seed = *a.seed;
  const Corpus corpus = a.corpus.load();
  corpus.validate();
  const std::uint64_t seed = config.training.seed;
  LayerGraph graph = build_graph(config, seed);
  std::ofstream metrics;
  if (!a.metrics.empty()) {
    metrics.open(a.metrics, std::ios::binary | std::ios::trunc);
    if (!metrics) throw IngestionError("cannot write metrics to '" + a.metrics + "'");
  }
  Checkpoint ckpt{config, graph, seed, 0, 0};
  if (config.training.epochs > 0) {
    TrainResult result = train(corpus.train_samples(), std::move(graph), config.training);
    ckpt.graph = std::move(result.graph);
    ckpt.epochs_completed = result.epochs_completed;
    ckpt.inputs_seen = result.inputs_seen;
    if (metrics.is_open()) write_metrics_csv(metrics, result.metrics);
  } else if (metrics.is_open()) {
    write_metrics_csv(metrics, {});
  }
  save_checkpoint(a.out, ckpt);
  std::cout << "wrote " << a.out << " (" << ckpt.epochs_completed << " epochs, " << ckpt.inputs_seen
            << " inputs)\n";
  return 0;
}

struct InferArgs {
  std::string checkpoint;
  CorpusArgs corpus;
  InputArgs input;
  bool no_feedback = false;
  bool centroids = false;
  std::string codes_out;
  int threads = 1;
};

int run_infer(const InferArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  LayerGraph& graph = ckpt.graph;
  if (a.no_feedback) graph.set_feedback_enabled(false);
  std::optional<Corpus> corpus;
  if (a.corpus.given()) corpus = a.corpus.load();
  const auto [sample, presence] = a.input.resolve(corpus);
  if (!presence.vision && !presence.text) throw UsageError("nothing to infer: both modalities are absent");

  const NetworkState st = solve_network(graph, sample, presence);
  const auto energies = layer_energies(graph, st, sample);
  const auto baseline = zero_code_energies(graph, st, sample);
  std::cout << "layer\tactive\tsparsity\tenergy\treconstruction\tzero_code_energy\n";
  for (std::size_t i = 0; i < graph.size(); ++i) {
    std::cout << graph.layer(i).name << '\t' << (st.active[i] ? "yes" : "no") << '\t'
              << fmt(sparsity_fraction(st[i].a)) << '\t' << fmt(energies[i].total()) << '\t'
              << fmt(energies[i].reconstruction) << '\t' << fmt(baseline[i]) << '\n';
  }
  if (a.centroids) {
    if (!corpus) throw UsageError("--centroids needs a corpus");
    for (const auto& [layer, by_class] : train_codes(graph, *corpus, presence, a.threads)) {
      print_centroid(layer, nearest_centroid(by_class, st[graph.index_of(layer)].a));
    }
  }
  if (!a.codes_out.empty()) {
    fs::create_directories(a.codes_out);
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto& name = graph.layer(i).name;
      std::ofstream codes(fs::path(a.codes_out) / (name + "_code.csv"), std::ios::binary);
      write_features_csv(codes, {sample.label.empty() ? "input" : sample.label}, {st[i].a});
      std::ofstream trace(fs::path(a.codes_out) / (name + "_energy.csv"), std::ios::binary);
      write_energy_trace_csv(trace, st.energy[i]);
      if (!codes || !trace) throw IngestionError("cannot write outputs under '" + a.codes_out + "'");
    }
  }
  return 0;
}

struct GenerateArgs {
  std::string checkpoint;
  CorpusArgs corpus;
  InputArgs input;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  std::optional<Corpus> corpus;
  if (a.corpus.given()) corpus = a.corpus.load();
  const auto [sample, presence] = a.input.resolve(corpus);
  if (presence.vision == presence.text) throw UsageError("generate needs exactly one modality");

  const GeneratedModality g = generate_missing_modality(ckpt.graph, sample, presence);
  fs::create_directories(a.out);
  const bool text_missing = g.generated_branch == Branch::kText;
  const fs::path generated = fs::path(a.out) / (text_missing ? "generated_text.png" : "generated_image.png");
  const fs::path recon = fs::path(a.out) / (text_missing ? "reconstruction_image.png" : "reconstruction_text.png");
  save_png(generated, g.generated);
  save_png(recon, g.present_reconstruction);
  std::cout << "wrote " << generated.string() << " and " << recon.string() << '\n';
  if (corpus) {
    std::map<std::string, std::vector<Tensor>> pixels;
    for (const auto& s : corpus->train_samples()) pixels[s.label].push_back(text_missing ? s.text : s.image);
    print_centroid("generated", nearest_centroid(pixels, g.generated));
  }
  return 0;
}

struct AnalyzeArgs {
  std::string checkpoint;
  CorpusArgs corpus;
  std::string layer;
  std::string out;
  std::optional<std::size_t> neuron;
  std::optional<std::string> label;
  double ratio = 2.0;
  bool no_image = false;
  bool no_text = false;
  int threads = 1;
};

std::string default_layer(const LayerGraph& graph, const std::string& requested) {
  if (!requested.empty()) return requested;
  if (const auto j = graph.joint_index()) return graph.layer(*j).name;
  return graph.layer(0).name;
}

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw UsageError("--out is required");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  return out;
}

int run_analyze(const std::string& sub, const AnalyzeArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const LayerGraph& graph = ckpt.graph;
  const Corpus corpus = a.corpus.load();
  const auto samples = a.corpus.samples(corpus);
  const std::string layer = default_layer(graph, a.layer);
  const BranchPresence presence{!a.no_image, !a.no_text};

  if (sub == "sparsity") {
    if (samples.empty()) throw PreconditionError("no samples selected");
    const auto codes = infer_codes(graph, samples, layer, presence, a.threads);
    double total = 0.0;
    for (const auto& c : codes) total += sparsity_fraction(c);
    std::cout << layer << " mean sparsity_fraction " << fmt(total / static_cast<double>(codes.size())) << '\n';
  } else if (sub == "export") {
    if (a.out.empty()) throw UsageError("--out is required");
    export_features(graph, samples, layer, a.out, presence, a.threads);
    std::cout << "wrote " << samples.size() << " rows to " << a.out << '\n';
  } else if (sub == "activations") {
    std::map<std::string, std::vector<Sample>> by_class;
    for (const auto& s : samples) by_class[s.label].push_back(s);
    std::vector<std::string> labels;
    std::vector<Tensor> means;
    for (const auto& [label, subset] : by_class) {
      const auto m = class_average_activation(graph, subset, layer, presence, a.threads);
      labels.push_back(label);
      means.emplace_back(Shape{m.size()}, m);
    }
    std::ofstream out = open_out(a.out);
    write_features_csv(out, labels, means);
    std::cout << "wrote " << labels.size() << " class means to " << a.out << '\n';
  } else if (sub == "ata") {
    if (!a.neuron) throw UsageError("--neuron is required");
    if (a.out.empty()) throw UsageError("--out is required");
    const auto ata = activity_triggered_average(graph, samples, layer, *a.neuron, a.threads);
    fs::create_directories(a.out);
    save_png(fs::path(a.out) / "ata_image.png", ata.image);
    save_png(fs::path(a.out) / "ata_text.png", ata.text);
    std::cout << "total weight " << fmt(ata.total_weight) << ", wrote " << a.out << '\n';
  } else if (sub == "invariants") {
    std::string target;
    if (a.label) {
      target = *a.label;
    } else {
      std::size_t best = 0;
      for (const auto& [label, n] : corpus.class_counts) {
        if (n > best) {
          best = n;
          target = label;
        }
      }
    }
    const auto found = find_invariant_neurons(graph, samples, target, a.ratio, a.threads);
    std::cout << found.size() << " neurons reach ratio " << fmt(a.ratio) << " for '" << target << "'\n";
    std::cout << "neuron\timage_target\timage_other\timage_ratio\ttext_target\ttext_other\ttext_ratio\n";
    for (const auto& p : found) {
      std::cout << p.neuron << '\t' << fmt(p.image_target) << '\t' << fmt(p.image_other) << '\t'
                << fmt(p.image_ratio) << '\t' << fmt(p.text_target) << '\t' << fmt(p.text_other) << '\t'
                << fmt(p.text_ratio) << '\n';
    }
  }
  return 0;
}

struct GenArgs {
  std::uint64_t seed = 7;
  std::string out;
  std::string png_dir;
  std::size_t classes = 10;
  std::size_t per_class = 20;
  std::size_t overrepresented = 5;
};

void write_pngs(const Corpus& corpus, const std::string& dir) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.tsv", std::ios::binary);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const std::string name = "sample_" + std::to_string(i) + ".png";
    save_png(fs::path(dir) / name, corpus.samples[i].image);
    manifest << name << '\t' << corpus.samples[i].label << '\n';
  }
  if (corpus.probe) save_png(fs::path(dir) / "probe.png", corpus.probe->image);
  if (!manifest) throw IngestionError("cannot write manifest under '" + dir + "'");
}

int run_toy_gen(const GenArgs& a) {
  const Corpus corpus = generate_toy_corpus(a.seed);
  save_corpus(a.out, corpus);
  write_pngs(corpus, a.png_dir);
  std::cout << "wrote " << corpus.samples.size() << " samples to " << a.out << " (probe ratio "
            << fmt(toy_probe_ratio(corpus)) << ")\n";
  return 0;
}

int run_faces_gen(const GenArgs& a) {
  const Corpus corpus = generate_synthetic_faces(a.classes, a.per_class, a.overrepresented, a.seed);
  save_corpus(a.out, corpus);
  write_pngs(corpus, a.png_dir);
  std::cout << "wrote " << corpus.samples.size() << " samples in " << corpus.class_counts.size() << " classes to "
            << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal convolutional sparse coding"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for per-sample analysis")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Learn dictionaries and write a checkpoint");
  train_cmd->add_option("--config", train_args.config, "Model config")->required();
  train_cmd->add_option("--seed", train_args.seed, "Override the config's training seed");
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--metrics", train_args.metrics, "Per-input metrics CSV");
  train_args.corpus.add(train_cmd);

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "Run inference on one input");
  infer_cmd->add_option("--checkpoint", infer_args.checkpoint, "Trained checkpoint")->required();
  infer_args.corpus.add(infer_cmd);
  infer_args.input.add(infer_cmd);
  infer_cmd->add_flag("--no-feedback", infer_args.no_feedback, "Disable top-down feedback");
  infer_cmd->add_flag("--centroids", infer_args.centroids,
                      "Classify each layer's code by nearest centroid over the corpus's training split");
  infer_cmd->add_option("--out", infer_args.codes_out, "Directory for per-layer code and energy CSVs");

  GenerateArgs gen_args;
  auto* generate_cmd = app.add_subcommand("generate", "Generate the missing modality");
  generate_cmd->add_option("--checkpoint", gen_args.checkpoint, "Trained checkpoint")->required();
  gen_args.corpus.add(generate_cmd);
  gen_args.input.add(generate_cmd);
  generate_cmd->add_option("--out", gen_args.out, "Output directory")->required();

  AnalyzeArgs an_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Measure a trained model over a corpus");
  analyze_cmd->require_subcommand(1);
  const std::pair<const char*, const char*> analyses[] = {
      {"activations", "Per-class mean activation of every neuron"},
      {"ata", "Average triggering input of one neuron"},
      {"invariants", "Neurons selective for one class in both modalities"},
      {"export", "One row of pooled codes per sample"},
      {"sparsity", "Mean fraction of active neurons"},
  };
  for (const auto& [sub, what] : analyses) {
    auto* s = analyze_cmd->add_subcommand(sub, what);
    s->add_option("--checkpoint", an_args.checkpoint, "Trained checkpoint")->required();
    an_args.corpus.add(s);
    s->add_option("--layer", an_args.layer, "Layer name (default: the joint layer)");
    s->add_option("--out", an_args.out, "Output file or directory");
    s->add_flag("--no-image", an_args.no_image, "Present text only");
    s->add_flag("--no-text", an_args.no_text, "Present images only");
    if (std::string(sub) == "ata") s->add_option("--neuron", an_args.neuron, "Joint-layer neuron index")->required();
    if (std::string(sub) == "invariants") {
      s->add_option("--label", an_args.label, "Target class (default: the largest class)");
      s->add_option("--ratio", an_args.ratio, "Minimum selectivity ratio in both presentations")->capture_default_str();
    }
  }

  GenArgs toy_args;
  auto* toy_cmd = app.add_subcommand("toy-gen", "Generate the toy B/13 corpus");
  toy_cmd->add_option("--seed", toy_args.seed, "Corpus seed")->capture_default_str();
  toy_cmd->add_option("--out", toy_args.out, "Corpus cache path")->required();
  toy_cmd->add_option("--png-dir", toy_args.png_dir, "Also write PNGs and a manifest here");

  GenArgs faces_args;
  auto* faces_cmd = app.add_subcommand("faces-gen", "Generate a synthetic faces corpus");
  faces_cmd->add_option("--seed", faces_args.seed, "Corpus seed")->capture_default_str();
  faces_cmd->add_option("--out", faces_args.out, "Corpus cache path")->required();
  faces_cmd->add_option("--png-dir", faces_args.png_dir, "Also write PNGs and a manifest here");
  faces_cmd->add_option("--classes", faces_args.classes, "Number of identities")->capture_default_str();
  faces_cmd->add_option("--per-class", faces_args.per_class, "Samples per ordinary identity")->capture_default_str();
  faces_cmd->add_option("--overrepresented", faces_args.overrepresented, "Size multiplier of class 0")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(train_args);
    if (*infer_cmd) {
      infer_args.threads = threads;
      return run_infer(infer_args);
    }
    if (*generate_cmd) return run_generate(gen_args);
    if (*analyze_cmd) {
      an_args.threads = threads;
      return run_analyze(analyze_cmd->get_subcommands().front()->get_name(), an_args);
    }
    if (*toy_cmd) return run_toy_gen(toy_args);
    if (*faces_cmd) return run_faces_gen(faces_args);
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericDivergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
