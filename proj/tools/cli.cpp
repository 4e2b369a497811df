#include "cli.hpp"

#include "semdist/embed_io.hpp"
#include "semdist/error.hpp"
#include "semdist/filtering.hpp"
#include "semdist/matan.hpp"
#include "semdist/metrics.hpp"
#include "semdist/report_json.hpp"
#include "semdist/reweight.hpp"
#include "semdist/semantics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace semdist::cli {

namespace {

namespace fs = std::filesystem;

// Where a subcommand's outputs go: stdout when no --out-dir is given,
// otherwise fixed file names under it.
class Sink {
 public:
  Sink(std::ostream& out, std::string out_dir) : out_(out), dir_(std::move(out_dir)) {}

  bool to_files() const { return !dir_.empty(); }

  void document(const Json& doc, const std::string& file) {
    write_text(file, doc.dump(2) + "\n");
  }

  void lines(const std::vector<Json>& rows, const std::string& file) {
    std::string text;
    for (const auto& row : rows) text += row.dump() + "\n";
    write_text(file, text);
  }

  fs::path path(const std::string& file) {
    ensure_dir();
    return fs::path(dir_) / file;
  }

 private:
  void ensure_dir() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoFailure, "cannot create output directory '" + dir_ + "': " + ec.message());
  }

  void write_text(const std::string& file, const std::string& text) {
    if (!to_files()) {
      out_ << text;
      return;
    }
    write_file_bytes(path(file), {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  }

  std::ostream& out_;
  std::string dir_;
};

struct DataInputs {
  std::string dataset;
  std::string embeddings;
  std::string out_dir;
};

void add_dataset(CLI::App* sub, DataInputs& in, bool with_embeddings) {
  sub->add_option("--dataset", in.dataset, "Knowledge dataset (JSON Lines)")->required();
  if (with_embeddings) sub->add_option("--embeddings", in.embeddings, "Answer embeddings (SEMB)")->required();
  sub->add_option("--out-dir", in.out_dir, "Write outputs under this directory instead of stdout");
}

Json base_config(const std::string& subcommand, const DataInputs& in) {
  Json cfg = {{"subcommand", subcommand}, {"dataset", in.dataset}};
  if (!in.embeddings.empty()) cfg["embeddings"] = in.embeddings;
  return cfg;
}

// ---------------------------------------------------------------------------

struct DistanceCmd {
  DataInputs in;
  std::string pair = "old";

  void setup(CLI::App* sub) {
    add_dataset(sub, in, true);
    sub->add_option("--pair", pair, "Which answer to compare with the target")
        ->check(CLI::IsMember({"old", "new"}))
        ->capture_default_str();
  }

  void exec(std::ostream& out, unsigned threads) const {
    Json cfg = base_config("distance", in);
    cfg["pair"] = pair;
    const auto items = read_dataset(in.dataset);
    const auto table = read_embeddings(in.embeddings);
    const auto which = pair == "old" ? DistancePair::OldVsTarget : DistancePair::NewVsTarget;
    if (which == DistancePair::NewVsTarget) {
      for (const auto& item : items) {
        if (!item.new_answer) throw Error(ErrorKind::MissingNewAnswer, "item '" + item.id + "' has no 'new' answer");
      }
    }
    const auto d = target_distances(items, table, which, threads);
    std::vector<Json> rows;
    rows.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      rows.push_back({{"item_id", items[i].id}, {"pair", pair}, {"distance", d[i]}});
    }
    Sink sink(out, in.out_dir);
    sink.lines(rows, "distances.jsonl");
    if (sink.to_files()) sink.document(cfg, "config.json");
  }
};

struct ScoreCmd {
  DataInputs in;

  void setup(CLI::App* sub) { add_dataset(sub, in, false); }

  void exec(std::ostream& out, unsigned) const {
    const auto items = read_dataset(in.dataset);
    Json doc = {{"config", base_config("score", in)}, {"report", to_json(score_dataset(items))}};
    Sink(out, in.out_dir).document(doc, "scores.json");
  }
};

struct DeviationCmd {
  DataInputs in;

  void setup(CLI::App* sub) { add_dataset(sub, in, true); }

  void exec(std::ostream& out, unsigned threads) const {
    const auto items = read_dataset(in.dataset);
    const auto table = read_embeddings(in.embeddings);
    const auto analysis = deviation_analysis(items, table, threads);
    Json doc = {{"config", base_config("deviation", in)}};
    doc.update(to_json(analysis));
    Sink(out, in.out_dir).document(doc, "deviation.json");
  }
};

struct BinReportCmd {
  DataInputs in;
  double bin_width = kDefaultBinWidth;
  std::vector<std::string> stats{"accuracy", "deviation"};

  void setup(CLI::App* sub) {
    add_dataset(sub, in, true);
    sub->add_option("--bin-width", bin_width, "Width of each distance bin, in (0, 1]")->capture_default_str();
    sub->add_option("--stats", stats, "Per-bin statistics to compute")
        ->check(CLI::IsMember({"accuracy", "deviation"}))
        ->delimiter(',')
        ->capture_default_str();
  }

  void exec(std::ostream& out, unsigned threads) const {
    StatSet set{false, false};
    for (const auto& s : stats) (s == "accuracy" ? set.accuracy : set.deviation) = true;
    Json cfg = base_config("bin-report", in);
    cfg["bin_width"] = bin_width;
    cfg["stats"] = Json::array();
    if (set.accuracy) cfg["stats"].push_back("accuracy");
    if (set.deviation) cfg["stats"].push_back("deviation");

    const auto items = read_dataset(in.dataset);
    const auto table = read_embeddings(in.embeddings);
    const auto report = binned_report(items, table, bin_width, set, threads);
    Json doc = {{"config", cfg}, {"report", to_json(report)}};
    Sink(out, in.out_dir).document(doc, "bins.json");
  }
};

struct FilterCmd {
  DataInputs in;
  std::string pool;
  FilterConfig cfg;
  std::string dispersion = "variance";
  std::string baseline = "none";

  void setup(CLI::App* sub) {
    add_dataset(sub, in, true);
    sub->add_option("--pool", pool, "Candidate pool (JSON Lines)")->required();
    sub->add_option("--lambda", cfg.lambda_weight, "Weight of the dispersion term")->capture_default_str();
    sub->add_option("--mean-min", cfg.mean_min, "Lower bound on the working-set mean distance")
        ->capture_default_str();
    sub->add_option("--mean-max", cfg.mean_max, "Upper bound on the working-set mean distance")
        ->capture_default_str();
    sub->add_option("--replace-fraction", cfg.replace_fraction, "Fraction of the working set to replace")
        ->capture_default_str();
    sub->add_option("--dispersion", dispersion, "Dispersion term")
        ->check(CLI::IsMember({"variance", "stddev"}))
        ->capture_default_str();
    sub->add_option("--baseline", baseline, "Also run a comparison baseline")
        ->check(CLI::IsMember({"none", "random"}))
        ->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed for the random baseline")->capture_default_str();
  }

  void exec(std::ostream& out, unsigned threads) {
    cfg.dispersion = dispersion == "stddev" ? Dispersion::StdDev : Dispersion::Variance;
    validate(cfg);
    Json config = base_config("filter", in);
    config["pool"] = pool;
    config["baseline"] = baseline;
    config.update(to_json(cfg));

    const auto working = read_dataset(in.dataset);
    const auto candidates = read_dataset(pool);
    const auto table = read_embeddings(in.embeddings);
    const auto result = greedy_filter(working, candidates, table, cfg, threads);
    Json doc = {{"config", config}, {"result", to_json(result)}, {"baseline", nullptr}};
    if (baseline == "random") doc["baseline"] = to_json(random_baseline(working, candidates, table, cfg, threads));

    std::map<std::string_view, const KnowledgeItem*> by_id;
    for (const auto* set : {&working, &candidates})
      for (const auto& item : *set) by_id.emplace(item.id, &item);
    std::vector<Json> rows;
    rows.reserve(result.final_set.size());
    for (const auto& id : result.final_set) rows.push_back(Json::parse(format_item(*by_id.at(id))));

    Sink sink(out, in.out_dir);
    sink.document(doc, "filter_result.json");
    if (sink.to_files()) sink.lines(rows, "filtered.jsonl");
  }
};

struct ReweightCmd {
  DataInputs in;
  double gamma = kDefaultGamma;

  void setup(CLI::App* sub) {
    add_dataset(sub, in, true);
    sub->add_option("--gamma", gamma, "Non-negative re-weighting strength")->capture_default_str();
  }

  void exec(std::ostream& out, unsigned threads) const {
    Json cfg = base_config("reweight", in);
    cfg["gamma"] = gamma;
    const auto items = read_dataset(in.dataset);
    const auto table = read_embeddings(in.embeddings);
    const auto weights = emit_weights(items, table, gamma, threads);
    std::vector<Json> rows;
    rows.reserve(weights.size());
    for (const auto& w : weights) rows.push_back(to_json(w));
    Sink sink(out, in.out_dir);
    sink.lines(rows, "weights.jsonl");
    if (sink.to_files()) sink.document(cfg, "config.json");
  }
};

struct SvdProjectCmd {
  std::string w_path;
  std::string dw_path;
  std::string out_dir;
  std::size_t rank = 8;
  std::uint64_t seed = 0;

  void setup(CLI::App* sub) {
    sub->add_option("--w", w_path, "Base weight matrix (SMAT)")->required();
    sub->add_option("--dw", dw_path, "Weight update matrix (SMAT)")->required();
    sub->add_option("--rank", rank, "Subspace rank r")->capture_default_str();
    sub->add_option("--seed", seed, "Seed for the random-subspace baseline")->capture_default_str();
    sub->add_option("--out-dir", out_dir, "Write outputs under this directory instead of stdout");
  }

  void exec(std::ostream& out, unsigned) const {
    Json cfg = {{"subcommand", "svd-project"}, {"w", w_path}, {"dw", dw_path}, {"rank", rank}, {"seed", seed}};
    const auto report = subspace_report(read_matrix(w_path), read_matrix(dw_path), rank, seed);
    Json doc = {{"config", cfg}, {"report", to_json(report)}};
    Sink(out, out_dir).document(doc, "subspace.json");
  }
};

struct PcaCmd {
  std::string features;
  std::string out_dir;
  std::size_t components = kDefaultComponents;
  bool projections = false;

  void setup(CLI::App* sub) {
    sub->add_option("--features", features, "Stacked feature rows (SMAT)")->required();
    sub->add_option("--components", components, "Number of principal components")->capture_default_str();
    sub->add_flag("--projections", projections, "Also write projections.smat (requires --out-dir)");
    sub->add_option("--out-dir", out_dir, "Write outputs under this directory instead of stdout");
  }

  void exec(std::ostream& out, unsigned) const {
    Json cfg = {{"subcommand", "pca"}, {"features", features}, {"components", components},
                {"projections", projections}};
    const auto result = pca(read_matrix(features), components);
    Json doc = {{"config", cfg}, {"result", to_json(result)}};
    Sink sink(out, out_dir);
    sink.document(doc, "pca.json");
    if (projections) {
      if (!sink.to_files()) throw Error(ErrorKind::InvalidConfig, "--projections needs --out-dir");
      write_matrix(result.projections, sink.path("projections.smat"));
    }
  }
};

struct ValidateCmd {
  std::string dataset;
  std::string embeddings;
  std::vector<std::string> matrices;
  std::string out_dir;

  void setup(CLI::App* sub) {
    sub->add_option("--dataset", dataset, "Knowledge dataset (JSON Lines)");
    sub->add_option("--embeddings", embeddings, "Answer embeddings (SEMB)");
    sub->add_option("--matrix", matrices, "Dense matrix file (SMAT); repeatable");
    sub->add_option("--out-dir", out_dir, "Write outputs under this directory instead of stdout");
  }

  void exec(std::ostream& out, unsigned) const {
    if (dataset.empty() && embeddings.empty() && matrices.empty()) {
      throw Error(ErrorKind::InvalidConfig, "validate needs --dataset, --embeddings or --matrix");
    }
    Json cfg = {{"subcommand", "validate"}, {"dataset", dataset}, {"embeddings", embeddings},
                {"matrices", matrices}};
    Json doc = {{"config", cfg}};

    std::vector<KnowledgeItem> items;
    if (!dataset.empty()) {
      items = read_dataset(dataset);
      std::size_t with_new = 0, rephrases = 0, probes = 0;
      for (const auto& item : items) {
        with_new += item.new_answer ? 1 : 0;
        rephrases += item.rephrases.size();
        probes += item.locality_probes.size();
      }
      doc["dataset"] = {{"n_items", items.size()}, {"n_with_new", with_new}, {"n_rephrases", rephrases},
                        {"n_probes", probes}};
    }
    if (!embeddings.empty()) {
      const auto table = read_embeddings(embeddings);
      doc["embeddings"] = {{"dim", table.dim()}, {"n_records", table.size()}};
      if (!dataset.empty()) {
        std::vector<std::string> missing;
        for (const auto& item : items) {
          std::vector<AnswerRole> roles{AnswerRole::Target, AnswerRole::Old};
          if (item.new_answer) roles.push_back(AnswerRole::New);
          for (auto role : roles) {
            auto key = embedding_key(item.id, role);
            if (!table.contains(key)) missing.push_back(std::move(key));
          }
        }
        if (!missing.empty()) {
          std::string list;
          for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
          throw Error(ErrorKind::MissingEmbedding,
                      std::to_string(missing.size()) + " embedding key(s) missing: " + list);
        }
      }
    }
    if (!matrices.empty()) {
      doc["matrices"] = Json::array();
      for (const auto& path : matrices) {
        const auto m = read_matrix(path);
        doc["matrices"].push_back({{"path", path}, {"rows", m.rows()}, {"cols", m.cols()}});
      }
    }
    Sink(out, out_dir).document(doc, "validate.json");
  }
};

void report_error(std::ostream& err, const std::string& kind, const std::string& detail,
                  std::optional<std::uint64_t> offset = std::nullopt) {
  Json e = {{"error_kind", kind}, {"detail", detail}};
  if (offset) e["offset"] = *offset;
  err << e.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"semdist: semantic-distance diagnostics for knowledge fine-tuning data", "semdist"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI config file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");

  DistanceCmd distance;
  ScoreCmd score;
  DeviationCmd deviation;
  BinReportCmd bins;
  FilterCmd filter;
  ReweightCmd reweight;
  SvdProjectCmd svd_project;
  PcaCmd pca_cmd;
  ValidateCmd validate_cmd;

  std::vector<std::pair<CLI::App*, std::function<void()>>> handlers;
  auto add = [&](auto& cmd, const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.setup(sub);
    handlers.emplace_back(sub, [&cmd, &out, &threads] { cmd.exec(out, threads); });
  };
  add(distance, "distance", "Target semantic distance per item (distances.jsonl)");
  add(score, "score", "Accuracy, generality and locality (scores.json)");
  add(deviation, "deviation", "Deviation records and proportions (deviation.json)");
  add(bins, "bin-report", "Statistics binned by old-answer distance (bins.json)");
  add(filter, "filter", "Greedy data filtering (filter_result.json, filtered.jsonl)");
  add(reweight, "reweight", "Per-example loss weights (weights.jsonl)");
  add(svd_project, "svd-project", "Subspace projection norms (subspace.json)");
  add(pca_cmd, "pca", "Principal components of feature rows (pca.json)");
  add(validate_cmd, "validate", "Check input files and report counts");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    for (auto& [sub, handler] : handlers) {
      if (sub->parsed()) handler();
    }
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.kind())), e.detail(), e.offset());
    return kExitError;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return kExitError;
  }
  return kExitOk;
}

}  // namespace semdist::cli
