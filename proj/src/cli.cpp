#include "nlx/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "nlx/annotation_store.hpp"
#include "nlx/classify.hpp"
#include "nlx/generate.hpp"
#include "nlx/json_io.hpp"
#include "nlx/reports.hpp"
#include "nlx/run_config.hpp"
#include "nlx/service.hpp"
#include "nlx/taxonomy.hpp"

namespace nlx {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required = true) {
  cmd->add_option("--config", o.config, "run config file (key = value lines)")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", o.out, "output directory");
  if (out_required) out->required();
  cmd->add_option("--seed", o.seed, "overrides the config seed");
}

class Command {
 public:
  Command(const CommonOptions& o, std::ostream& log) : log_(log) {
    if (!o.config.empty()) cfg_ = load_run_config(o.config);
    if (o.seed) cfg_.seed = *o.seed;
    if (!o.out.empty()) {
      out_ = o.out;
      fs::create_directories(out_);
      write_file("run_config.txt", cfg_.to_text());
    }
  }

  const RunConfig& cfg() const { return cfg_; }
  fs::path path(const std::string& name) const { return out_ / name; }

  Corpus corpus(const std::vector<std::string>& generations = {}) const {
    if (cfg_.corpus.empty()) throw ParamError("no corpus configured");
    Corpus c = load_corpus(cfg_.corpus, cfg_.corpus_format);
    for (const auto& g : generations) c = merge_fragment(c, g);
    return c;
  }

  template <class Writer>
  void write_csv(const std::string& name, Writer&& writer) const {
    std::ofstream f(path(name), std::ios::binary);
    writer(f, cfg_.header());
    if (!f) throw Error("cannot write '" + path(name).string() + "'");
    log_ << "wrote " << path(name).string() << '\n';
  }

  void write_file(const std::string& name, const std::string& content) const {
    std::ofstream f(path(name), std::ios::binary);
    f << content;
    if (!f) throw Error("cannot write '" + path(name).string() + "'");
  }

  std::ostream& log() const { return log_; }

 private:
  RunConfig cfg_;
  fs::path out_;
  std::ostream& log_;
};

// LLM client behind the configured cache; reports traffic on destruction.
class ClientStack {
 public:
  explicit ClientStack(const Command& cmd)
      : cmd_(cmd), inner_(make_client(cmd.cfg().client)), cached_(*inner_, cmd.cfg().cache_dir) {}
  ~ClientStack() {
    const auto s = cached_.stats();
    cmd_.log() << "client calls: " << s.misses << ", cache hits: " << s.hits << ", failures: " << s.failures
               << '\n';
  }
  LlmClient& client() { return cached_; }

 private:
  const Command& cmd_;
  std::unique_ptr<LlmClient> inner_;
  CachedClient cached_;
};

std::vector<Explanation> model_explanations(const Corpus& c, std::optional<Paradigm> p = {}) {
  std::vector<Explanation> out;
  for (const auto& e : c.explanations()) {
    if (e.author == Author::model && (!p || e.paradigm == p)) out.push_back(e);
  }
  return out;
}

int cmd_ingest(const CommonOptions& o, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus();
  {
    std::ofstream f(cmd.path("corpus.jsonl"), std::ios::binary);
    write_native_jsonl(f, c);
  }
  const auto n = c.counts();
  cmd.write_csv("summary.csv", [&](std::ostream& f, const std::string& header) {
    f << header << "items,explanations,human_explanations,model_explanations,highlights\n"
      << n.items << ',' << n.explanations << ',' << n.human_explanations << ',' << n.model_explanations << ','
      << n.highlights << '\n';
  });
  return kExitOk;
}

struct ClassifyArgs {
  std::vector<std::string> prompts, baselines, predictions;
};

int cmd_classify(const CommonOptions& o, const ClassifyArgs& a, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus();
  std::vector<std::string> prompts = a.prompts, baselines = a.baselines;
  if (prompts.empty() && baselines.empty() && a.predictions.empty()) {
    for (const auto& pc : classifier_configs()) prompts.push_back(pc.tag());
    baselines = {"random", "majority"};
  }
  std::vector<std::pair<std::string, ClassificationReport>> rows;
  auto record = [&](const std::string& name, const std::vector<PredictionRecord>& preds) {
    {
      std::ofstream f(cmd.path("predictions_" + name + ".jsonl"), std::ios::binary);
      write_predictions(f, preds);
    }
    auto report = evaluate(preds, c);
    cmd.write_csv("confusion_" + name + ".csv", [&](std::ostream& f, const std::string& header) {
      write_classification_confusion_csv(f, header, report);
    });
    rows.emplace_back(name, std::move(report));
  };

  std::vector<std::string> missing;
  if (!prompts.empty()) {
    const ExemplarStore exemplars = load_exemplars(cmd.cfg().exemplar_path());
    ClientStack stack(cmd);
    for (const auto& tag : prompts) {
      const auto pc = parse_config_tag(tag);
      auto outcome = run_classification(stack.client(), pc, c, exemplars,
                                        {cmd.cfg().decoding, cmd.cfg().max_workers});
      for (auto& id : outcome.missing) missing.push_back(pc.tag() + ":" + id);
      record(pc.tag(), outcome.records);
    }
  }
  const auto ids = labeled_human_ids(c);
  for (const auto& b : baselines) {
    BaselineKind kind;
    if (b == "random") {
      kind = BaselineKind::random(cmd.cfg().seed);
    } else if (b == "majority") {
      kind = BaselineKind::majority();
    } else {
      throw ParamError("unknown baseline '" + b + "'");
    }
    record(b, baseline_predict(kind, labels_of(c, ids), ids));
  }
  for (const auto& p : a.predictions) record(fs::path(p).stem().string(), load_external_predictions(p, c));

  cmd.write_csv("classification.csv", [&](std::ostream& f, const std::string& header) {
    write_classification_csv(f, header, rows);
  });
  if (!missing.empty()) throw PartialRunError(missing);
  return kExitOk;
}

struct GenerateArgs {
  std::vector<std::string> paradigms;
  std::string hints = "human";
};

int cmd_generate(const CommonOptions& o, const GenerateArgs& a, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus();
  const auto hints = hint_source_from_string(a.hints);
  if (!hints) throw ParamError("hints must be human or model");
  std::vector<Paradigm> paradigms;
  for (const auto& name : a.paradigms) {
    const auto p = paradigm_from_string(name);
    if (!p) throw ParamError("unknown paradigm '" + name + "'");
    paradigms.push_back(*p);
  }
  if (paradigms.empty()) paradigms.assign(kAllParadigms.begin(), kAllParadigms.end());

  const ExemplarStore exemplars = load_exemplars(cmd.cfg().exemplar_path());
  std::vector<std::string> failed;
  ClientStack stack(cmd);
  for (Paradigm p : paradigms) {
    const auto run = run_paradigm(stack.client(), c, p, *hints, exemplars, {cmd.cfg().decoding, cmd.cfg().max_workers});
    const auto dir = cmd.path(std::string(to_string(p)));
    write_run_directory(run, dir);
    cmd.write_file(std::string(to_string(p)) + "/run_config.txt", cmd.cfg().to_text());
    log << "wrote " << dir.string() << " (" << run.batches.size() << " items, " << run.failed.size()
        << " failed)\n";
    for (const auto& [item, msg] : run.failed) failed.push_back(std::string(to_string(p)) + ":" + item);
  }
  if (!failed.empty()) throw PartialRunError(failed);
  return kExitOk;
}

int cmd_evaluate(const CommonOptions& o, const std::vector<std::string>& generations, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus(generations);
  if (model_explanations(c).empty()) throw ParamError("no model explanations to evaluate");
  auto embedder = make_embedder(cmd.cfg().embedder);
  auto tagger = make_tagger(cmd.cfg().tagger);
  const auto rows = score_generations(c, *embedder, *tagger, cmd.cfg().max_workers);
  cmd.write_csv("similarity.csv",
                [&](std::ostream& f, const std::string& header) { write_similarity_csv(f, header, rows); });
  return kExitOk;
}

int cmd_coverage(const CommonOptions& o, const std::vector<std::string>& generations, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus(generations);
  auto embedder = make_embedder(cmd.cfg().embedder);
  std::vector<std::pair<std::string, CorpusCoverage>> rows;
  for (Paradigm p : kAllParadigms) {
    const auto expls = model_explanations(c, p);
    if (expls.empty()) continue;
    const auto items = coverage_by_item(c, expls, *embedder, cmd.cfg().projection_config(), cmd.cfg().max_workers);
    const std::string mode(to_string(p));
    if (items.empty()) {
      log << mode << ": no item has both human and model explanations\n";
      continue;
    }
    rows.emplace_back(mode, corpus_coverage(items));
    cmd.write_csv("coverage_items_" + mode + ".csv", [&](std::ostream& f, const std::string& header) {
      write_coverage_items_csv(f, header, items);
    });
    cmd.write_csv("coverage_points_" + mode + ".csv", [&](std::ostream& f, const std::string& header) {
      write_coverage_points_csv(f, header, items);
    });
  }
  if (rows.empty()) throw ParamError("no item has both human and model explanations");
  cmd.write_csv("coverage.csv", [&](std::ostream& f, const std::string& header) { write_coverage_csv(f, header, rows); });
  return kExitOk;
}

int cmd_agreement(const CommonOptions& o, const std::vector<std::string>& files, std::ostream& log) {
  Command cmd(o, log);
  std::vector<AgreementRow> rows;
  for (std::size_t i = 0; i + 1 < files.size(); i += 2) {
    const auto a = load_annotator_records(files[i]);
    const auto b = load_annotator_records(files[i + 1]);
    AgreementRow row{fs::path(files[i]).stem().string() + " vs " + fs::path(files[i + 1]).stem().string(),
                     agreement_between(a, b), ""};
    if (row.result.shared_labels) {
      row.confusion_path = "confusion_" + std::to_string(rows.size() + 1) + ".csv";
      cmd.write_csv(row.confusion_path, [&](std::ostream& f, const std::string& header) {
        write_confusion_csv(f, header, row.result.confusion);
      });
    }
    rows.push_back(std::move(row));
  }
  cmd.write_csv("agreement.csv", [&](std::ostream& f, const std::string& header) { write_agreement_csv(f, header, rows); });
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> generations;
  std::string validations;
};

int cmd_report(const CommonOptions& o, const ReportArgs& a, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus(a.generations);
  const auto dist = report_category_distribution(c);
  cmd.write_csv("category_distribution.csv", [&](std::ostream& f, const std::string& header) {
    write_category_distribution_csv(f, header, dist);
  });
  const auto buckets = report_items_by_category_count(c);
  cmd.write_csv("items_by_category_count.csv", [&](std::ostream& f, const std::string& header) {
    write_items_by_count_csv(f, header, buckets);
  });
  const auto spans = report_span_length_by_category(c);
  cmd.write_csv("span_length.csv", [&](std::ostream& f, const std::string& header) {
    write_span_length_csv(f, header, spans);
  });
  auto embedder = make_embedder(cmd.cfg().embedder);
  auto tagger = make_tagger(cmd.cfg().tagger);
  const auto within = report_within_label(c, *embedder, *tagger, cmd.cfg().max_workers);
  cmd.write_csv("within_label.csv", [&](std::ostream& f, const std::string& header) {
    write_within_label_csv(f, header, within);
  });
  if (!a.validations.empty()) {
    if (!fs::exists(a.validations)) throw ParamError("no validation log '" + a.validations + "'");
    const AnnotationStore store(c, a.validations);
    const auto rates = report_validation_rates(c, store.latest_validations());
    cmd.write_csv("validation.csv", [&](std::ostream& f, const std::string& header) {
      write_validation_csv(f, header, rates);
    });
  }
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log_path;
  std::vector<std::string> generations;
};

int cmd_serve(const CommonOptions& o, const ServeArgs& a, std::ostream& log) {
  Command cmd(o, log);
  const Corpus c = cmd.corpus(a.generations);
  AnnotationStore store(c, a.log_path);
  AnnotationService service(store);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = service.bind(a.host, a.port);
  if (port < 0) throw Error("cannot bind " + a.host + ":" + std::to_string(a.port));
  log << json{{"listening", "http://" + a.host + ":" + std::to_string(port)}}.dump() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.listen_after_bind();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return kExitOk;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const PartialRunError*>(&e)) return "partial_run";
  if (dynamic_cast<const RowError*>(&e)) return "bad_row";
  if (dynamic_cast<const IntegrityError*>(&e)) return "integrity";
  if (dynamic_cast<const InvalidCategory*>(&e)) return "invalid_category";
  if (dynamic_cast<const ExemplarError*>(&e)) return "exemplars";
  if (dynamic_cast<const TransportError*>(&e)) return "transport";
  if (dynamic_cast<const ParseError*>(&e)) return "unparsable_output";
  if (dynamic_cast<const ParamError*>(&e)) return "bad_parameter";
  if (dynamic_cast<const Error*>(&e)) return "runtime";
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return "filesystem";
  return "internal";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explanation-variation toolkit for NLI corpora", "nlx"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<std::string> generations, pair_files;
  ClassifyArgs classify_args;
  GenerateArgs generate_args;
  ReportArgs report_args;
  ServeArgs serve_args;

  auto* ingest = app.add_subcommand("ingest", "validate a corpus and write it in native form");
  add_common(ingest, common);

  auto* classify = app.add_subcommand("classify", "classify human explanations into the eight categories");
  add_common(classify, common);
  classify->add_option("--prompt", classify_args.prompts, "prompt config tag, e.g. instr1_k2");
  classify->add_option("--baseline", classify_args.baselines, "random | majority");
  classify->add_option("--predictions", classify_args.predictions, "external prediction file")
      ->check(CLI::ExistingFile);

  auto* generate = app.add_subcommand("generate", "generate explanations under one or more paradigms");
  add_common(generate, common);
  generate->add_option("--paradigm", generate_args.paradigms, "paradigm name; default all");
  generate->add_option("--hints", generate_args.hints, "highlight hint source: human | model");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "similarity of model explanations to human references");
  add_common(evaluate_cmd, common);
  evaluate_cmd->add_option("--generations", generations, "generations.jsonl to merge")->check(CLI::ExistingFile);

  auto* coverage = app.add_subcommand("coverage", "embedding-space coverage of human explanations");
  add_common(coverage, common);
  coverage->add_option("--generations", generations, "generations.jsonl to merge")->check(CLI::ExistingFile);

  auto* agreement = app.add_subcommand("agreement", "kappa and highlight IoU between two annotators");
  add_common(agreement, common);
  agreement->add_option("--pair", pair_files, "two annotator files")
      ->expected(2)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->required()
      ->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "annotation analyses of a corpus");
  add_common(report, common);
  report->add_option("--generations", report_args.generations, "generations.jsonl to merge")
      ->check(CLI::ExistingFile);
  report->add_option("--validations", report_args.validations, "annotation log with validation records");

  auto* serve = app.add_subcommand("serve", "HTTP service for annotation and validation");
  add_common(serve, common, false);
  serve->add_option("--host", serve_args.host);
  serve->add_option("--port", serve_args.port, "0 picks a free port");
  serve->add_option("--log", serve_args.log_path, "annotation log file")->required();
  serve->add_option("--generations", serve_args.generations, "generations.jsonl to validate")
      ->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }
  if (*agreement && pair_files.size() % 2 != 0) {
    err << "--pair takes two files\n" << agreement->help();
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(common, out);
    if (*classify) return cmd_classify(common, classify_args, out);
    if (*generate) return cmd_generate(common, generate_args, out);
    if (*evaluate_cmd) return cmd_evaluate(common, generations, out);
    if (*coverage) return cmd_coverage(common, generations, out);
    if (*agreement) return cmd_agreement(common, pair_files, out);
    if (*report) return cmd_report(common, report_args, out);
    if (*serve) return cmd_serve(common, serve_args, out);
  } catch (const std::exception& e) {
    json j{{"error", error_kind(e)}, {"message", e.what()}};
    if (const auto* p = dynamic_cast<const PartialRunError*>(&e)) j["missing"] = p->missing();
    err << j.dump() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace nlx
