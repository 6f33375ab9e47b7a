// specdec: train desk-scale models, calibrate a correction memory, generate
// with standard or calibrated speculative decoding, benchmark policies, and
// analyze rejection logs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specdec/analysis.hpp"
#include "specdec/calibrate.hpp"
#include "specdec/corpus.hpp"
#include "specdec/errors.hpp"
#include "specdec/generate.hpp"
#include "specdec/harness.hpp"
#include "specdec/memory.hpp"
#include "specdec/model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

struct DraftFlags {
  std::string model_path;
  std::string swap_pairs;  // "a:b,c:d" token ids
  double swap_strength = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

void add_draft_flags(CLI::App* cmd, DraftFlags& flags) {
  cmd->add_option("--draft", flags.model_path, "draft model file")->required();
  cmd->add_option("--draft-swap", flags.swap_pairs,
                  "wrap the draft with logit swaps, e.g. '12:13,40:41'");
  cmd->add_option("--draft-swap-strength", flags.swap_strength, "swap mixing strength in [0,1]");
  cmd->add_option("--draft-noise-sigma", flags.noise_sigma, "deterministic logit noise sigma");
  cmd->add_option("--draft-noise-seed", flags.noise_seed, "seed for the draft logit noise");
}

std::vector<std::pair<specdec::TokenId, specdec::TokenId>> parse_swap_pairs(
    const std::string& spec) {
  std::vector<std::pair<specdec::TokenId, specdec::TokenId>> pairs;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw specdec::ParseError("bad swap pair '" + item + "', expected '<id>:<id>'");
    }
    pairs.emplace_back(static_cast<specdec::TokenId>(std::stol(item.substr(0, colon))),
                       static_cast<specdec::TokenId>(std::stol(item.substr(colon + 1))));
  }
  return pairs;
}

std::shared_ptr<const specdec::LanguageModel> load_draft(const DraftFlags& flags) {
  std::shared_ptr<const specdec::LanguageModel> base =
      std::make_shared<specdec::NGramModel>(specdec::NGramModel::load(flags.model_path));
  if (flags.swap_pairs.empty() && flags.noise_sigma == 0.0) return base;
  return specdec::make_perturbed_draft(base, parse_swap_pairs(flags.swap_pairs),
                                       flags.swap_strength, flags.noise_sigma, flags.noise_seed);
}

std::vector<double> parse_reals(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void echo_effective(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cerr << "# effective-config command=" << command;
  for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

void print_metrics_row(std::ostream& out, const std::string& name,
                       const specdec::RunMetrics& m, double speedup, double wall) {
  out << name << '\t' << m.drafted << '\t' << m.accepted << '\t' << m.rescued << '\t'
      << m.target_calls << '\t' << m.emitted_tokens << '\t';
  if (m.drafted == 0) out << "n/a";
  else out << m.acceptance_rate();
  out << '\t' << m.mean_accepted_len() << '\t' << speedup << '\t' << wall << '\n';
}

constexpr const char* kMetricsHeader =
    "policy\tdrafted\taccepted\trescued\trounds\temitted\tacceptance_rate\tmean_accepted_len\t"
    "speedup\twall_seconds";

int run_cli(int argc, char** argv) {
  CLI::App app{"speculative decoding engine with calibrated verification"};
  app.set_config("--config", "", "key=value config file; command-line flags win");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "master seed; all randomness derives from it");

  // ---- train ----------------------------------------------------------
  auto* train = app.add_subcommand("train", "train an n-gram model from a corpus");
  std::string tr_corpus, tr_vocab, tr_out;
  int tr_order = 3;
  double tr_alpha = 0.1;
  train->add_option("--corpus", tr_corpus)->required();
  train->add_option("--vocab", tr_vocab)->required();
  train->add_option("--order", tr_order)->check(CLI::PositiveNumber);
  train->add_option("--alpha", tr_alpha)->check(CLI::PositiveNumber);
  train->add_option("--out", tr_out)->required();

  // ---- calibrate ------------------------------------------------------
  auto* cal = app.add_subcommand("calibrate", "populate a correction memory via standard SD");
  DraftFlags cal_draft;
  std::string cal_target, cal_corpus, cal_vocab, cal_out, cal_memory_in;
  int cal_gamma = 6, cal_max_tokens = 64, cal_workers = 1;
  double cal_temperature = 0.6;
  std::uint32_t cal_lambda = 6;
  add_draft_flags(cal, cal_draft);
  cal->add_option("--target", cal_target)->required();
  cal->add_option("--corpus", cal_corpus)->required();
  cal->add_option("--vocab", cal_vocab)->required();
  cal->add_option("--gamma", cal_gamma)->check(CLI::PositiveNumber);
  cal->add_option("--temperature", cal_temperature);
  cal->add_option("--lambda", cal_lambda)->check(CLI::PositiveNumber);
  cal->add_option("--max-tokens", cal_max_tokens)->check(CLI::PositiveNumber);
  cal->add_option("--workers", cal_workers)->check(CLI::PositiveNumber);
  cal->add_option("--memory-in", cal_memory_in, "existing memory to extend incrementally");
  cal->add_option("--out", cal_out)->required();

  // ---- run ------------------------------------------------------------
  auto* run = app.add_subcommand("run", "generate from a prompt under one decoding policy");
  DraftFlags run_draft;
  std::string run_target, run_vocab, run_prompt, run_mode = "csd", run_memory, run_log;
  int run_gamma = 6, run_max_tokens = 128;
  double run_temperature = 0.0, run_tau = -1.0;
  std::uint32_t run_lambda = 6;
  std::int64_t run_eos = -1;
  add_draft_flags(run, run_draft);
  run->add_option("--target", run_target)->required();
  run->add_option("--vocab", run_vocab)->required();
  run->add_option("--prompt", run_prompt, "whitespace-separated symbols")->required();
  run->add_option("--mode", run_mode, "vanilla | sd | csd | ocm-only | scg-only | lossy");
  run->add_option("--gamma", run_gamma)->check(CLI::PositiveNumber);
  run->add_option("--temperature", run_temperature);
  run->add_option("--tau", run_tau, "SCG threshold; defaults 0.01 (0.6 for lossy)");
  run->add_option("--lambda", run_lambda)->check(CLI::PositiveNumber);
  run->add_option("--memory", run_memory, "OCM TSV to preload");
  run->add_option("--max-tokens", run_max_tokens)->check(CLI::PositiveNumber);
  run->add_option("--eos", run_eos, "stop after emitting this token id");
  run->add_option("--log", run_log, "write a JSON-lines round log here");

  // ---- bench ----------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "compare decoding policies on a prompt set");
  DraftFlags bench_draft;
  std::string bench_target, bench_vocab, bench_prompts, bench_policies = "sd,csd";
  std::string bench_memory, bench_out, bench_seeds = "0";
  std::string bench_sweep, bench_sweep_values, bench_cal_corpus;
  int bench_gamma = 6, bench_max_tokens = 64;
  double bench_temperature = 0.0, bench_tau = -1.0, bench_c_draft = 1.0 / 70.0;
  std::uint32_t bench_lambda = 6;
  bool bench_parallel = false;
  add_draft_flags(bench, bench_draft);
  bench->add_option("--target", bench_target)->required();
  bench->add_option("--vocab", bench_vocab)->required();
  bench->add_option("--prompts", bench_prompts, "corpus file of prompts")->required();
  bench->add_option("--policies", bench_policies, "comma list of policy names");
  bench->add_option("--gamma", bench_gamma)->check(CLI::PositiveNumber);
  bench->add_option("--temperature", bench_temperature);
  bench->add_option("--tau", bench_tau);
  bench->add_option("--lambda", bench_lambda)->check(CLI::PositiveNumber);
  bench->add_option("--max-tokens", bench_max_tokens)->check(CLI::PositiveNumber);
  bench->add_option("--c-draft", bench_c_draft, "cost of one draft forward vs one target forward");
  bench->add_option("--memory", bench_memory, "OCM TSV preloaded into every policy");
  bench->add_option("--seeds", bench_seeds, "comma list; one metrics block per seed");
  bench->add_flag("--parallel", bench_parallel, "run one policy per worker thread");
  bench->add_option("--sweep", bench_sweep, "sweep one of: tau, lambda, calibration-size");
  bench->add_option("--sweep-values", bench_sweep_values, "comma list of sweep values");
  bench->add_option("--calibration-corpus", bench_cal_corpus,
                    "prompts for the calibration-size sweep");
  bench->add_option("--out", bench_out, "metrics TSV (stdout when omitted)");

  // ---- analyze --------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "rejection-pattern report from a round log");
  std::string an_log, an_out = "analysis", an_pair, an_bins = "-10,-8,-6,-4,-2,0";
  double an_head_fraction = 0.2;
  analyze->add_option("--log", an_log, "JSON-lines round log")->required();
  analyze->add_option("--head-fraction", an_head_fraction);
  analyze->add_option("--bins", an_bins, "log10-ratio histogram bin edges");
  analyze->add_option("--pair", an_pair, "histogram pair '<draft>:<target>' (default: top pair)");
  analyze->add_option("--out", an_out, "report path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) {
    echo_effective("train", {{"corpus", tr_corpus}, {"vocab", tr_vocab},
                             {"order", std::to_string(tr_order)},
                             {"alpha", std::to_string(tr_alpha)}, {"out", tr_out}});
    const auto vocab = specdec::Vocabulary::load(tr_vocab);
    const auto corpus = specdec::load_corpus(tr_corpus, vocab);
    specdec::train_ngram(corpus, vocab.size(), tr_order, tr_alpha).save(tr_out);
    std::cerr << "trained order-" << tr_order << " model over " << corpus.size() << " documents\n";
    return kExitOk;
  }

  if (cal->parsed()) {
    echo_effective("calibrate",
                   {{"gamma", std::to_string(cal_gamma)},
                    {"temperature", std::to_string(cal_temperature)},
                    {"lambda", std::to_string(cal_lambda)},
                    {"max_tokens", std::to_string(cal_max_tokens)},
                    {"seed", std::to_string(seed)}, {"out", cal_out}});
    const auto vocab = specdec::Vocabulary::load(cal_vocab);
    const auto prompts = specdec::load_corpus(cal_corpus, vocab);
    const auto draft = load_draft(cal_draft);
    const auto target = specdec::NGramModel::load(cal_target);

    specdec::CalibrationOptions opts;
    opts.gamma = cal_gamma;
    opts.temperature = cal_temperature;
    opts.max_tokens_per_prompt = cal_max_tokens;
    opts.base_seed = seed;
    opts.workers = cal_workers;

    if (cal_memory_in.empty()) {
      specdec::calibrate(*draft, target, prompts, opts, cal_lambda).save(cal_out);
    } else {
      auto memory = specdec::CorrectionMemory::load(cal_memory_in);
      if (memory.lambda() != cal_lambda) {
        throw specdec::ParseError("memory lambda " + std::to_string(memory.lambda()) +
                                  " does not match --lambda " + std::to_string(cal_lambda));
      }
      specdec::calibrate_incremental(memory, *draft, target, prompts, opts);
      memory.save(cal_out);
    }
    std::cerr << "calibrated over " << prompts.size() << " prompts\n";
    return kExitOk;
  }

  if (run->parsed()) {
    const auto policy = specdec::make_policy(run_mode, run_tau, run_lambda);
    echo_effective("run", {{"mode", policy.name}, {"gamma", std::to_string(run_gamma)},
                           {"temperature", std::to_string(run_temperature)},
                           {"tau", std::to_string(policy.tau)},
                           {"lambda", std::to_string(run_lambda)},
                           {"seed", std::to_string(seed)}});
    const auto vocab = specdec::Vocabulary::load(run_vocab);
    const auto prompt = specdec::tokenize_line(run_prompt, vocab);
    const auto target = specdec::NGramModel::load(run_target);

    specdec::GenerateOptions gen;
    gen.gamma = run_gamma;
    gen.temperature = run_temperature;
    gen.max_tokens = run_max_tokens;
    if (run_eos >= 0) gen.eos = static_cast<specdec::TokenId>(run_eos);

    std::ofstream log_stream;
    specdec::EventLogWriter log_writer(log_stream);
    if (!run_log.empty()) {
      log_stream.open(run_log);
      if (!log_stream) throw specdec::IoError("cannot write log file: " + run_log);
      gen.log = &log_writer;
    }

    specdec::RngStream rng(seed);
    specdec::GenerateResult result;
    if (policy.mode == specdec::DecodeMode::kVanilla) {
      result = specdec::vanilla_generate(target, prompt, gen, rng);
    } else {
      const auto draft = load_draft(run_draft);
      auto memory = run_memory.empty() ? specdec::CorrectionMemory(run_lambda)
                                       : specdec::CorrectionMemory::load(run_memory);
      result = specdec::generate(*draft, target, prompt, gen, policy.to_config(), memory, rng);
    }

    std::cout << specdec::detokenize(result.tokens, vocab) << '\n';
    std::cerr << kMetricsHeader << '\n';
    specdec::CostModel cost;
    cost.gamma = run_gamma;
    const double speedup = policy.mode == specdec::DecodeMode::kVanilla
                               ? 1.0
                               : specdec::estimate_speedup(result.metrics, cost);
    print_metrics_row(std::cerr, policy.name, result.metrics, speedup, 0.0);
    return kExitOk;
  }

  if (bench->parsed()) {
    echo_effective("bench", {{"policies", bench_policies}, {"gamma", std::to_string(bench_gamma)},
                             {"temperature", std::to_string(bench_temperature)},
                             {"seeds", bench_seeds}, {"c_draft", std::to_string(bench_c_draft)}});
    const auto vocab = specdec::Vocabulary::load(bench_vocab);
    const auto prompts = specdec::load_corpus(bench_prompts, vocab);
    const auto draft = load_draft(bench_draft);
    const auto target = specdec::NGramModel::load(bench_target);

    std::vector<specdec::PolicySpec> policies;
    {
      std::istringstream ss(bench_policies);
      std::string name;
      while (std::getline(ss, name, ',')) {
        policies.push_back(specdec::make_policy(name, bench_tau, bench_lambda));
      }
    }
    const auto initial_memory = bench_memory.empty()
                                    ? specdec::CorrectionMemory(bench_lambda)
                                    : specdec::CorrectionMemory::load(bench_memory);

    specdec::CompareOptions opts;
    opts.gen.gamma = bench_gamma;
    opts.gen.temperature = bench_temperature;
    opts.gen.max_tokens = bench_max_tokens;
    opts.cost = {bench_c_draft, bench_gamma};
    opts.parallel_policies = bench_parallel;

    std::ofstream file_out;
    if (!bench_out.empty()) {
      file_out.open(bench_out);
      if (!file_out) throw specdec::IoError("cannot write output file: " + bench_out);
    }
    std::ostream& out = bench_out.empty() ? std::cout : file_out;

    if (!bench_sweep.empty()) {
      if (bench_sweep_values.empty()) {
        throw specdec::ParseError("--sweep requires --sweep-values");
      }
      specdec::SweepParam param;
      if (bench_sweep == "tau") param = specdec::SweepParam::kTau;
      else if (bench_sweep == "lambda") param = specdec::SweepParam::kLambda;
      else if (bench_sweep == "calibration-size") param = specdec::SweepParam::kCalibrationSize;
      else throw specdec::ParseError("unknown sweep parameter '" + bench_sweep +
                                     "' (valid: tau, lambda, calibration-size)");
      std::vector<std::vector<specdec::TokenId>> cal_prompts;
      if (!bench_cal_corpus.empty()) cal_prompts = specdec::load_corpus(bench_cal_corpus, vocab);
      opts.base_seed = seed;
      const auto points = specdec::sweep(*draft, target, prompts, policies.front(), param,
                                         parse_reals(bench_sweep_values), initial_memory,
                                         cal_prompts, opts);
      out << "value\t" << kMetricsHeader << '\n';
      for (const auto& pt : points) {
        out << pt.value << '\t';
        print_metrics_row(out, pt.result.policy.name, pt.result.metrics, pt.result.speedup,
                          pt.result.wall_seconds);
      }
      return kExitOk;
    }

    out << "seed\t" << kMetricsHeader << '\n';
    for (double s : parse_reals(bench_seeds)) {
      opts.base_seed = static_cast<std::uint64_t>(s);
      const auto results =
          specdec::compare_policies(*draft, target, prompts, policies, initial_memory, opts);
      for (const auto& r : results) {
        out << opts.base_seed << '\t';
        print_metrics_row(out, r.policy.name, r.metrics, r.speedup, r.wall_seconds);
      }
    }
    return kExitOk;
  }

  if (analyze->parsed()) {
    echo_effective("analyze", {{"log", an_log},
                               {"head_fraction", std::to_string(an_head_fraction)},
                               {"out", an_out}});
    const auto stats = specdec::analyze_log(an_log);
    specdec::write_pattern_report(stats, an_out + ".patterns.tsv");
    if (stats.counts.empty()) {
      std::cerr << "warning: no rejection events in " << an_log << "; empty report written\n";
      return kExitOk;
    }
    std::cerr << "total rejections: " << stats.total << ", distinct patterns: "
              << stats.counts.size() << ", head coverage(" << an_head_fraction
              << "): " << specdec::head_coverage(stats, an_head_fraction) << '\n';

    specdec::PatternStats::Key pair;
    if (an_pair.empty()) {
      // most frequent pair, ties to the smaller key
      pair = stats.counts.begin()->first;
      std::uint64_t best = 0;
      for (const auto& [key, c] : stats.counts) {
        if (c > best) { best = c; pair = key; }
      }
    } else {
      const auto colon = an_pair.find(':');
      if (colon == std::string::npos) {
        throw specdec::ParseError("bad --pair '" + an_pair + "', expected '<draft>:<target>'");
      }
      pair = {static_cast<specdec::TokenId>(std::stol(an_pair.substr(0, colon))),
              static_cast<specdec::TokenId>(std::stol(an_pair.substr(colon + 1)))};
    }
    const auto edges = parse_reals(an_bins);
    specdec::write_histogram_report(specdec::ratio_histogram(stats, pair, edges), edges,
                                    an_out + ".histogram.tsv");
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const specdec::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const specdec::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const specdec::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
