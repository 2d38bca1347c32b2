// coldoc: contrastive long-document matching from the command line.
//
// Subcommands: synth, train, eval, compare, experiment {ablation, perturb,
// length, batch}. Exit codes: 0 success, 2 config/usage error, 3 data or
// format error, 4 training divergence.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coldoc/checkpoint.hpp"
#include "coldoc/corpus.hpp"
#include "coldoc/errors.hpp"
#include "coldoc/io.hpp"
#include "coldoc/metrics.hpp"
#include "coldoc/model.hpp"
#include "coldoc/similarity.hpp"
#include "coldoc/synth.hpp"
#include "coldoc/train.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace coldoc;

class Stopwatch {
 public:
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const std::string& path, const std::string& command, const json& config,
                    const std::vector<std::string>& input_paths,
                    const std::vector<std::string>& output_paths, long long wall_ms) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["inputs"] = json::object();
  for (const std::string& p : input_paths) m["inputs"][p] = file_hash_hex(p);
  m["outputs"] = output_paths;
  m["wall_ms"] = wall_ms;
  m["version"] = kVersion;
  atomic_write_file(path, m.dump(2));
}

/// Parses a plain `key = value` config file into --key=value tokens.
/// Precedence is defaults < file < flags: the caller splices these tokens in
/// ahead of the user's flags and every option takes its last occurrence.
std::vector<std::string> config_file_tokens(const std::string& path) {
  std::string content;
  try {
    content = read_file(path);
  } catch (const data_error& e) {
    throw config_error(e.what());
  }
  std::vector<std::string> tokens;
  std::istringstream ss(content);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw config_error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw config_error(path + ":" + std::to_string(line_no) + ": empty key or value");
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

/// Command-line tokens with any --config file expanded in place: the file's
/// tokens are inserted after the leading subcommand words so explicit flags,
/// which come later, win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string cfg_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      cfg_path = args[i].substr(9);
    }
  }
  if (cfg_path.empty()) return args;
  std::vector<std::string> expanded = config_file_tokens(cfg_path);
  std::size_t insert_at = 0;
  while (insert_at < args.size() && !args[insert_at].empty() && args[insert_at][0] != '-') {
    ++insert_at;  // skip subcommand words and leading positionals
  }
  args.insert(args.begin() + std::ptrdiff_t(insert_at), expanded.begin(), expanded.end());
  return args;
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg, std::string& variant) {
  cmd->add_option("--variant", variant, "full|no-aug|no-lstm|no-cl")
      ->default_val("full");
  cmd->add_option("--batch-size", cfg.batch_size, "documents per batch");
  cmd->add_option("--sections", cfg.sections, "sections per document (n_p)");
  cmd->add_option("--chunk-len", cfg.chunk_len, "tokens per chunk");
  cmd->add_option("--d-model", cfg.d_model);
  cmd->add_option("--layers", cfg.layers);
  cmd->add_option("--enc-heads", cfg.enc_heads);
  cmd->add_option("--d-ff", cfg.d_ff);
  cmd->add_option("--cw-heads", cfg.cw_heads);
  cmd->add_option("--cw-head-dim", cfg.cw_head_dim);
  cmd->add_option("--d-lstm", cfg.d_lstm);
  cmd->add_option("--d-proj", cfg.d_proj);
  cmd->add_option("--max-sections", cfg.max_sections);
  cmd->add_option("--max-chunks", cfg.max_chunks);
  cmd->add_option("--tau", cfg.tau, "contrastive temperature");
  cmd->add_option("--lr", cfg.lr);
  cmd->add_option("--weight-decay", cfg.weight_decay);
  cmd->add_option("--epochs", cfg.epochs);
  cmd->add_option("--seed", cfg.seed);
  cmd->add_flag_callback(
      "--no-normalize-projection", [&cfg]() { cfg.normalize_projection = false; },
      "disable L2 normalization of projections");
  cmd->add_option("--max-section-tokens", cfg.max_section_tokens,
                  "truncate sections during training (0 = unlimited)");
  cmd->add_option("--vocab-min-freq", cfg.vocab_min_freq);
  cmd->add_option("--pairs-per-doc", cfg.pairs_per_doc);
}

void print_eval_table(const std::vector<std::pair<std::string, EvalResult>>& rows) {
  std::printf("%-12s %8s %8s %8s %8s\n", "run", "P", "R", "F1", "Acc");
  for (const auto& [name, r] : rows) {
    std::printf("%-12s %8.3f %8.3f %8.3f %8.3f\n", name.c_str(), r.precision, r.recall, r.f1,
                r.accuracy);
  }
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& flag) {
  std::vector<int> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) {
        try {
          out.push_back(std::stoi(cur));
        } catch (const std::exception&) {
          throw config_error(flag + ": '" + cur + "' is not an integer");
        }
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (out.empty()) throw config_error(flag + ": empty list");
  return out;
}

// --- subcommand runners -----------------------------------------------------

int cmd_synth(const SynthConfig& scfg, const std::string& out_path) {
  Stopwatch sw;
  RawCorpus corpus = synth_generate(scfg);
  save_corpus_jsonl(corpus, out_path);
  json cfg{{"classes", scfg.n_classes},
           {"docs_per_class", scfg.docs_per_class},
           {"vocab_size", scfg.vocab_size},
           {"sections", scfg.sections_per_doc},
           {"chunks_per_section", scfg.chunks_per_section},
           {"chunk_len", scfg.chunk_len},
           {"topic_sharpness", scfg.topic_sharpness},
           {"class_overlap", scfg.class_overlap},
           {"doc_topic_fraction", scfg.doc_topic_fraction},
           {"seed", scfg.seed}};
  write_manifest(out_path + ".manifest.json", "synth", cfg, {}, {out_path}, sw.ms());
  std::cout << "wrote " << corpus.size() << " documents to " << out_path << "\n";
  return 0;
}

int cmd_train(TrainConfig cfg, const std::string& corpus_path, const std::string& out_dir) {
  Stopwatch sw;
  cfg.corpus_path = corpus_path;
  RawCorpus corpus = load_corpus_jsonl(corpus_path);
  TrainResult result = train(cfg, corpus);

  std::string ckpt_path = out_dir + "/checkpoint.bin";
  std::string log_path = out_dir + "/log.jsonl";
  save_checkpoint(result.model, result.threshold, ckpt_path);
  atomic_write_file(log_path, epoch_log_to_jsonl(result.log));
  write_manifest(out_dir + "/manifest.json", "train",
                 json::parse(train_config_to_json(cfg)), {corpus_path},
                 {ckpt_path, log_path}, sw.ms());

  std::cout << "final loss " << result.log.back().loss << ", test accuracy "
            << result.test.accuracy << ", threshold " << result.threshold << "\n";
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_path,
             const std::string& out_path, double threshold_override, bool has_override) {
  Stopwatch sw;
  LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  RawCorpus corpus = load_corpus_jsonl(corpus_path);
  TestBench bench =
      make_test_bench(ckpt.model, corpus, ckpt.model.config.effective_sections());
  double threshold = has_override ? threshold_override : ckpt.threshold;
  EvalResult r = evaluate_pairs(ckpt.model, bench.docs, bench.pairs, threshold);

  std::string payload = eval_result_to_json(r);
  std::cout << payload << "\n";
  if (!out_path.empty()) {
    atomic_write_file(out_path, payload);
    write_manifest(out_path + ".manifest.json", "eval",
                   json{{"checkpoint", ckpt_path}, {"threshold", threshold}},
                   {ckpt_path, corpus_path}, {out_path}, sw.ms());
  }
  return 0;
}

int cmd_compare(const std::string& ckpt_path, const std::string& corpus_path,
                const std::vector<std::string>& ids, const std::string& out_dir) {
  Stopwatch sw;
  LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
  const Model& model = ckpt.model;
  RawCorpus corpus = load_corpus_jsonl(corpus_path);

  auto find_doc = [&](const std::string& id) -> const RawDocument& {
    for (const RawDocument& d : corpus) {
      if (d.id == id) return d;
    }
    throw data_error("compare: document id '" + id + "' not found in " + corpus_path);
  };
  std::size_t n_p = std::size_t(model.config.effective_sections());
  Document a = build_document(find_doc(ids[0]), model.vocab, n_p,
                              std::size_t(model.config.chunk_len));
  Document b = build_document(find_doc(ids[1]), model.vocab, n_p,
                              std::size_t(model.config.chunk_len));

  SimilarityReport report = compare_documents(a, b, model);
  std::vector<std::string> written = write_report(report, out_dir);
  write_manifest(out_dir + "/manifest.json", "compare",
                 json{{"checkpoint", ckpt_path}, {"ids", ids}}, {ckpt_path, corpus_path},
                 written, sw.ms());
  std::cout << "doc_score " << report.doc_score << "\n";
  for (const std::string& p : written) std::cout << p << "\n";
  return 0;
}

int cmd_experiment(const std::string& kind, TrainConfig cfg, const std::string& corpus_path,
                   const std::string& out_dir, const std::string& limits_csv,
                   const std::string& sizes_csv) {
  Stopwatch sw;
  cfg.corpus_path = corpus_path;
  RawCorpus corpus = load_corpus_jsonl(corpus_path);
  json result;

  if (kind == "ablation") {
    auto rows = run_ablation(cfg, corpus);
    std::vector<std::pair<std::string, EvalResult>> table;
    result = json::array();
    for (const AblationRow& r : rows) {
      result.push_back({{"variant", r.variant}, {"eval", json::parse(eval_result_to_json(r.eval))}});
      table.emplace_back(r.variant, r.eval);
    }
    print_eval_table(table);
  } else if (kind == "perturb") {
    // trained model vs a structural-embedding-free control, both evaluated
    // on clean and section-shuffled test documents
    TrainConfig control = cfg;
    control.variant = Variant::no_aug;
    TrainResult full_run = train(cfg, corpus);
    TrainResult control_run = train(control, corpus);
    PerturbResult fp = run_perturbation(full_run.model, full_run.threshold, corpus,
                                        cfg.sections, cfg.seed);
    PerturbResult cp = run_perturbation(control_run.model, control_run.threshold, corpus,
                                        cfg.sections, cfg.seed);
    result["full"] = {{"clean", json::parse(eval_result_to_json(fp.clean))},
                      {"shuffled", json::parse(eval_result_to_json(fp.shuffled))}};
    result["control_no_aug"] = {{"clean", json::parse(eval_result_to_json(cp.clean))},
                                {"shuffled", json::parse(eval_result_to_json(cp.shuffled))}};
    print_eval_table({{"full/clean", fp.clean},
                      {"full/shuf", fp.shuffled},
                      {"ctrl/clean", cp.clean},
                      {"ctrl/shuf", cp.shuffled}});
  } else if (kind == "length") {
    auto limits = parse_int_list(limits_csv, "--limits");
    auto rows = run_length_sweep(cfg, corpus, limits);
    std::vector<std::pair<std::string, EvalResult>> table;
    result = json::array();
    for (const LengthRow& r : rows) {
      result.push_back({{"limit", r.limit}, {"eval", json::parse(eval_result_to_json(r.eval))}});
      table.emplace_back("limit=" + std::to_string(r.limit), r.eval);
    }
    print_eval_table(table);
  } else if (kind == "batch") {
    auto sizes = parse_int_list(sizes_csv, "--sizes");
    auto curves = run_batchsize_sweep(cfg, corpus, sizes);
    result = json::array();
    for (const BatchCurve& c : curves) {
      result.push_back({{"batch_size", c.batch_size}, {"val_accuracy", c.val_accuracy}});
      std::printf("N=%-4d final val accuracy %.3f\n", c.batch_size,
                  c.val_accuracy.empty() ? 0.0 : c.val_accuracy.back());
    }
  } else {
    throw config_error("unknown experiment '" + kind + "'");
  }

  std::string out_path = out_dir + "/" + kind + ".json";
  atomic_write_file(out_path, result.dump(2));
  write_manifest(out_dir + "/manifest.json", "experiment " + kind,
                 json::parse(train_config_to_json(cfg)), {corpus_path}, {out_path}, sw.ms());
  std::cout << "results: " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive long-document matching toolkit"};
  app.require_subcommand(1);
  std::function<int()> run;

  // synth
  SynthConfig scfg;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  synth->add_option("--out", synth_out, "output corpus file (JSON lines)")->required();
  synth->add_option("--classes", scfg.n_classes);
  synth->add_option("--docs-per-class", scfg.docs_per_class);
  synth->add_option("--vocab-size", scfg.vocab_size);
  synth->add_option("--sections", scfg.sections_per_doc);
  synth->add_option("--chunks-per-section", scfg.chunks_per_section);
  synth->add_option("--chunk-len", scfg.chunk_len);
  synth->add_option("--topic-sharpness", scfg.topic_sharpness);
  synth->add_option("--class-overlap", scfg.class_overlap);
  synth->add_option("--doc-topic-fraction", scfg.doc_topic_fraction);
  synth->add_option("--seed", scfg.seed);
  synth->callback([&]() { run = [&]() { return cmd_synth(scfg, synth_out); }; });

  // train
  TrainConfig tcfg;
  std::string t_variant = "full", t_corpus, t_out_dir, t_config;
  CLI::App* train_cmd = app.add_subcommand("train", "train a matching model");
  train_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  train_cmd->add_option("--corpus", t_corpus, "corpus file")->required();
  train_cmd->add_option("--out-dir", t_out_dir, "output directory")->required();
  train_cmd->add_option("--config", t_config,
                        "config file with key = value lines; explicit flags override");
  add_train_options(train_cmd, tcfg, t_variant);
  train_cmd->callback([&]() {
    run = [&]() {
      tcfg.variant = variant_from_name(t_variant);
      return cmd_train(tcfg, t_corpus, t_out_dir);
    };
  });

  // eval
  std::string e_ckpt, e_corpus, e_out;
  double e_threshold = 0.0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on test pairs");
  eval_cmd->add_option("--checkpoint", e_ckpt)->required();
  eval_cmd->add_option("--corpus", e_corpus)->required();
  eval_cmd->add_option("--out", e_out, "write the result JSON here as well");
  CLI::Option* thr_opt = eval_cmd->add_option("--threshold", e_threshold,
                                              "override the stored decision threshold");
  eval_cmd->callback([&, thr_opt]() {
    run = [&, thr_opt]() {
      return cmd_eval(e_ckpt, e_corpus, e_out, e_threshold, thr_opt->count() > 0);
    };
  });

  // compare
  std::string c_ckpt, c_corpus, c_out_dir;
  std::vector<std::string> c_ids;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "three-level similarity report for two documents");
  compare_cmd->add_option("--checkpoint", c_ckpt)->required();
  compare_cmd->add_option("--corpus", c_corpus)->required();
  compare_cmd->add_option("--ids", c_ids, "two document ids")->expected(2)->required();
  compare_cmd->add_option("--out-dir", c_out_dir)->required();
  compare_cmd->callback(
      [&]() { run = [&]() { return cmd_compare(c_ckpt, c_corpus, c_ids, c_out_dir); }; });

  // experiment
  TrainConfig xcfg;
  std::string x_variant = "full", x_corpus, x_out_dir, x_kind, x_config,
              x_limits = "32,64,128", x_sizes = "2,4,8";
  CLI::App* exp_cmd = app.add_subcommand("experiment", "robustness and ablation runners");
  exp_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  exp_cmd->add_option("kind", x_kind, "ablation|perturb|length|batch")->required();
  exp_cmd->add_option("--corpus", x_corpus)->required();
  exp_cmd->add_option("--out-dir", x_out_dir)->required();
  exp_cmd->add_option("--config", x_config,
                      "config file with key = value lines; explicit flags override");
  exp_cmd->add_option("--limits", x_limits, "token limits for the length sweep (csv)");
  exp_cmd->add_option("--sizes", x_sizes, "batch sizes for the batch sweep (csv)");
  add_train_options(exp_cmd, xcfg, x_variant);
  exp_cmd->callback([&]() {
    run = [&]() {
      xcfg.variant = variant_from_name(x_variant);
      return cmd_experiment(x_kind, xcfg, x_corpus, x_out_dir, x_limits, x_sizes);
    };
  });

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help exits clean, usage errors exit 2
  }

  try {
    return run ? run() : 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
