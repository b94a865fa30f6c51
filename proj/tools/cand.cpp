// cand: reverse engineer CAN signal definitions from raw candump logs.
//
// Subcommands:
//   synth   generate a synthetic log + ground-truth DBC from a recipe
//   decode  learn signal definitions from a log and write a DBC
//   train   fit the boundary forest from (log, dbc) pairs
//   eval    compare boundary algorithms against a ground-truth DBC

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cand/pipeline.hpp"
#include "cand/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageFailure("cannot write " + path);
  out << content;
  if (!out) throw UsageFailure("short write to " + path);
}

cand::CanLog load_log(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw UsageFailure("cannot open " + path);
  return cand::parse_candump(in, strict, path);
}

std::vector<cand::MessageDefinition> load_dbc_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageFailure("cannot open " + path);
  return cand::read_dbc(in);
}

std::string did_csv_text(const std::vector<cand::DidTrace>& traces) {
  std::ostringstream ss;
  ss << "timestamp,label,unit,value\n";
  char buf[64];
  for (const cand::DidTrace& t : traces)
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", t.timestamps[k]);
      ss << buf << ',' << t.label << ',' << t.unit << ','
         << cand::detail::fmt(t.values[k]) << '\n';
    }
  return ss.str();
}

struct CommonFlags {
  cand::RunConfig cfg;
  std::string classifier = "heuristic";

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha1", cfg.alpha1, "heuristic cut threshold");
    cmd->add_option("--alpha2", cfg.alpha2, "heuristic jump threshold");
    cmd->add_option("--beta", cfg.beta, "cut penalty for the tokenizer");
    cmd->add_option("--gamma", cfg.gamma, "signedness extreme-pair threshold");
    cmd->add_option("--delta", cfg.delta, "minimum R^2 for a DID match");
    cmd->add_option("--seed", cfg.seed, "PRNG seed");
    cmd->add_option("--classifier", classifier,
                    "heuristic | forest:<model-file>");
    cmd->add_flag("--sample-and-hold", cfg.sample_and_hold,
                  "zero-order-hold interpolation in step 4");
  }

  void finalize() {
    for (double v : {cfg.alpha1, cfg.alpha2, cfg.beta, cfg.gamma, cfg.delta})
      if (v < 0.0 || v > 1.0)
        throw UsageFailure("thresholds must lie in [0, 1]");
    if (classifier == "heuristic") return;
    if (classifier.rfind("forest:", 0) == 0) {
      std::ifstream in(classifier.substr(7));
      if (!in) throw UsageFailure("cannot open model " + classifier.substr(7));
      cfg.forest = cand::load_forest(in);
      return;
    }
    throw UsageFailure("unknown classifier " + classifier +
                       " (expected heuristic or forest:<file>)");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"CAN signal definition recovery"};
  app.require_subcommand(1);

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string synth_recipe;
  std::string synth_out = "corpus";
  std::uint64_t synth_seed = 1;
  synth->add_option("recipe", synth_recipe,
                    "recipe file, or 'default' for the shipped corpus")
      ->required();
  synth->add_option("--seed", synth_seed, "PRNG seed");
  synth->add_option("--out", synth_out, "output path prefix");

  // --- decode ---
  auto* decode = app.add_subcommand("decode", "learn a DBC from a log");
  std::string decode_log_path;
  std::string decode_out = "decoded";
  std::string did_csv_path, did_rules_path;
  bool strict = false;
  CommonFlags decode_flags;
  decode->add_option("log", decode_log_path, "candump log")->required();
  decode->add_option("--out", decode_out, "output path prefix");
  decode->add_option("--did-csv", did_csv_path, "labeled DID traces (csv)");
  decode->add_option("--did-rules", did_rules_path,
                     "DID decode rules file, or 'default'");
  decode->add_flag("--strip-diagnostics", decode_flags.cfg.strip_diagnostics,
                   "drop diagnostic frames before tokenization");
  decode->add_flag("--strict", strict, "abort on the first malformed line");
  decode_flags.attach(decode);

  // --- train ---
  auto* train = app.add_subcommand("train", "fit the boundary forest");
  std::vector<std::string> train_pairs;
  std::string train_out = "model.forest";
  std::string dump_features_path;
  std::uint64_t train_seed = 1;
  cand::ForestHyperparams hp;
  train->add_option("--pair", train_pairs, "log,dbc (repeatable)")->required();
  train->add_option("--out", train_out, "model output path");
  train->add_option("--seed", train_seed, "PRNG seed");
  train->add_option("--trees", hp.tree_count, "ensemble size");
  train->add_option("--max-depth", hp.max_depth, "tree depth limit");
  train->add_option("--min-leaf", hp.min_samples_leaf, "min samples per leaf");
  train->add_option("--mtry", hp.features_per_split, "features tried per split");
  train->add_option("--dump-features", dump_features_path,
                    "write the gap feature matrix as csv");

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "compare boundary algorithms");
  std::string eval_log_path, eval_truth_path;
  std::string eval_out;
  std::string sets = "c,f-,f+";
  std::string algos = "cand-heuristic,constant,read,tang,librecan";
  CommonFlags eval_flags;
  eval->add_option("log", eval_log_path, "candump log")->required();
  eval->add_option("truth", eval_truth_path, "ground truth DBC")->required();
  eval->add_option("--sets", sets, "regimes: subset of c,f-,f+");
  eval->add_option("--algorithms", algos, "comma-separated algorithm list");
  eval->add_option("--out", eval_out, "metrics csv path prefix");
  eval_flags.attach(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      cand::CorpusRecipe recipe;
      if (synth_recipe == "default") {
        std::istringstream in(cand::default_recipe_text());
        recipe = cand::parse_recipe(in);
      } else {
        std::istringstream in(read_file(synth_recipe));
        recipe = cand::parse_recipe(in);
      }
      const cand::SynthOutput out = cand::generate_corpus(recipe, synth_seed);
      {
        std::ostringstream log_text;
        log_text << "# cand v" << cand::kVersion << " synth seed=" << synth_seed
                 << '\n';
        cand::serialize_candump(out.log, log_text);
        write_file(synth_out + ".log", log_text.str());
      }
      {
        std::ostringstream dbc;
        cand::write_dbc(out.truth, dbc,
                        std::string("cand v") + cand::kVersion +
                            " synth seed=" + std::to_string(synth_seed));
        write_file(synth_out + ".dbc", dbc.str());
      }
      if (!out.did_traces.empty())
        write_file(synth_out + "_did.csv",
                   "# cand v" + std::string(cand::kVersion) + " synth seed=" +
                       std::to_string(synth_seed) + "\n" +
                       did_csv_text(out.did_traces));
      std::cout << "wrote " << synth_out << ".log (" << out.log.frames.size()
                << " frames), " << synth_out << ".dbc";
      if (!out.did_traces.empty()) std::cout << ", " << synth_out << "_did.csv";
      std::cout << '\n';
      return kExitOk;
    }

    if (*decode) {
      decode_flags.finalize();
      cand::RunConfig& cfg = decode_flags.cfg;
      cand::CanLog log = load_log(decode_log_path, strict);
      std::vector<cand::DidTrace> dids;
      if (!did_csv_path.empty()) {
        std::istringstream in(read_file(did_csv_path));
        dids = cand::load_did_csv(in);
      }
      std::size_t stripped = 0;
      if (!did_rules_path.empty()) {
        std::vector<cand::DidDecodeRule> rules;
        if (did_rules_path == "default") {
          rules = cand::default_did_rules();
        } else {
          std::istringstream in(read_file(did_rules_path));
          rules = cand::load_did_rules(in);
        }
        std::vector<bool> matched;
        auto decoded = cand::extract_did_traces(log, rules, &matched);
        dids.insert(dids.end(), decoded.begin(), decoded.end());
        if (cfg.strip_diagnostics)
          log = cand::strip_frames(log, matched, &stripped);
      }
      cand::DecodeResult result = cand::decode_log(log, cfg, dids);
      result.stripped_frames = stripped;
      {
        std::ostringstream dbc;
        cand::write_dbc(result.messages, dbc, cand::config_header(cfg, "decode"));
        write_file(decode_out + ".dbc", dbc.str());
      }
      write_file(decode_out + ".report.txt", cand::decode_report(result, cfg));
      if (!dids.empty())
        write_file(decode_out + ".matches.csv",
                   "# " + cand::config_header(cfg, "decode") + "\n" +
                       cand::match_csv(result));
      std::cout << "wrote " << decode_out << ".dbc, " << decode_out
                << ".report.txt\n";
      return kExitOk;
    }

    if (*train) {
      std::vector<cand::LabeledLog> pairs;
      for (const std::string& spec : train_pairs) {
        const auto comma = spec.find(',');
        if (comma == std::string::npos)
          throw UsageFailure("--pair wants <log>,<dbc>: " + spec);
        cand::LabeledLog pair;
        pair.name = spec.substr(0, comma);
        pair.log = load_log(spec.substr(0, comma), false);
        pair.truth = load_dbc_file(spec.substr(comma + 1));
        pairs.push_back(std::move(pair));
      }
      const cand::TrainingSet set = cand::build_training_set(pairs);
      const cand::ForestModel model = cand::train_forest(set, hp, train_seed);
      {
        std::ostringstream out;
        cand::save_forest(model, out);
        write_file(train_out, out.str());
      }
      if (!dump_features_path.empty()) {
        std::ostringstream out;
        cand::dump_training_features(pairs, out);
        write_file(dump_features_path, out.str());
      }
      std::cout << "trained on " << set.size() << " gap samples; model -> "
                << train_out << '\n';
      if (pairs.size() >= 2) {
        const auto folds = cand::loocv_by_log(pairs, hp, train_seed);
        std::printf("%-24s %9s %9s %9s\n", "held-out log (f- set)", "P", "R", "F");
        for (const auto& fold : folds)
          std::printf("%-24s %9.3f %9.3f %9.3f\n", fold.held_out.c_str(),
                      fold.metrics.precision, fold.metrics.recall,
                      fold.metrics.f_score);
      } else {
        std::cout << "LOOCV skipped: needs at least 2 pairs\n";
      }
      return kExitOk;
    }

    if (*eval) {
      eval_flags.finalize();
      const cand::CanLog log = load_log(eval_log_path, false);
      const auto truth = load_dbc_file(eval_truth_path);
      std::vector<cand::Regime> regimes;
      {
        std::istringstream ss(sets);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          if (tok == "c") regimes.push_back(cand::Regime::Condensed);
          else if (tok == "f-") regimes.push_back(cand::Regime::FullNonobvious);
          else if (tok == "f+") regimes.push_back(cand::Regime::FullAll);
          else throw UsageFailure("unknown set " + tok + " (valid: c,f-,f+)");
        }
      }
      std::vector<cand::Algorithm> algorithms;
      {
        std::istringstream ss(algos);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          const auto a = cand::algorithm_from_string(tok);
          if (!a)
            throw UsageFailure(
                "unknown algorithm " + tok +
                " (valid: cand-heuristic, cand-forest, read, tang, librecan, "
                "constant)");
          if (*a == cand::Algorithm::CandForest && !eval_flags.cfg.forest)
            throw UsageFailure("cand-forest needs --classifier forest:<file>");
          algorithms.push_back(*a);
        }
      }
      const auto result = cand::evaluate_algorithms(log, truth, algorithms,
                                                    regimes, eval_flags.cfg);
      std::cout << "# " << cand::config_header(eval_flags.cfg, "eval") << "\n";
      std::cout << cand::eval_table_text(result);
      if (!eval_out.empty())
        write_file(eval_out + ".metrics.csv",
                   "# " + cand::config_header(eval_flags.cfg, "eval") + "\n" +
                       cand::eval_csv(result));
      return kExitOk;
    }
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
