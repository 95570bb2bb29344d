// factsum: corpus transformations for factuality-aware summarization data.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "factsum/nt_xent.hpp"
#include "factsum/pipeline.hpp"

using namespace factsum;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct Io {
  std::string input = "-";
  std::string output = "-";
  std::unique_ptr<std::ifstream> in_file;
  std::unique_ptr<std::ofstream> out_file;

  std::istream& in() {
    if (input == "-") return std::cin;
    if (!in_file) {
      in_file = std::make_unique<std::ifstream>(input);
      if (!*in_file) throw std::invalid_argument("cannot open input '" + input + "'");
    }
    return *in_file;
  }
  std::ostream& out() {
    if (output == "-") return std::cout;
    if (!out_file) {
      out_file = std::make_unique<std::ofstream>(output);
      if (!*out_file) throw std::invalid_argument("cannot open output '" + output + "'");
    }
    return *out_file;
  }
};

std::size_t default_workers() {
  if (const char* env = std::getenv("FACTSUM_WORKERS")) {
    try {
      auto n = std::stoul(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid FACTSUM_WORKERS='" << env << "'\n";
  }
  return 1;
}

struct Common {
  Io io;
  std::size_t workers = default_workers();
  bool lenient = false;
  std::string on_error = "abort";
  std::string report_file;
  std::string bank_corpus;
};

void add_io(CLI::App* cmd, Common& c) {
  cmd->add_option("input", c.io.input, "Input corpus (line-delimited JSON), - for stdin")->capture_default_str();
  cmd->add_option("-o,--output", c.io.output, "Output path, - for stdout")->capture_default_str();
  cmd->add_flag("--lenient", c.lenient, "Ignore unknown keys instead of rejecting them");
}

void add_run_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--workers", c.workers, "Worker threads (default $FACTSUM_WORKERS or 1)")->check(CLI::PositiveNumber);
  cmd->add_option("--on-error", c.on_error, "Per-record error policy")
      ->check(CLI::IsMember({"skip", "abort"}))
      ->capture_default_str();
  cmd->add_option("--report-file", c.report_file, "Write the run report as JSON here");
}

EntityBank load_bank(const Common& c) {
  const auto path = c.bank_corpus.empty() ? c.io.input : c.bank_corpus;
  if (path == "-") throw std::invalid_argument("extrinsic negatives read stdin: pass --bank-corpus");
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open bank corpus '" + path + "'");
  return build_entity_bank(f, c.workers, !c.lenient);
}

int execute(const PipelineConfig& config, Common& c) {
  std::optional<EntityBank> bank;
  for (auto s : config.stages)
    if (s == Stage::Negatives && config.negatives.mode == NegativeMode::Extrinsic) bank = load_bank(c);
  auto report = run(config, c.io.in(), c.io.out(), bank ? &*bank : nullptr);
  c.io.out().flush();
  if (!c.report_file.empty()) {
    std::ofstream f(c.report_file);
    f << to_json(report).dump(2) << '\n';
  }
  for (const auto& s : report.stages)
    if (s.skipped())
      std::cerr << s.stage << ": " << s.in << " in, " << s.out << " out, " << s.skipped() << " skipped\n";
  return kOk;
}

PipelineConfig base_config(const Common& c) {
  PipelineConfig config;
  config.workers = c.workers;
  config.strict_schema = !c.lenient;
  config.on_error = c.on_error == "skip" ? ErrorPolicy::Skip : ErrorPolicy::Abort;
  return config;
}

// Central finite differences of the loss with respect to every coordinate.
double max_gradient_error(Vector doc, Vector pos, std::vector<Vector> negs, double tau, double h) {
  const auto analytic = nt_xent_with_grad(doc, pos, negs, tau);
  double worst = 0.0;
  auto check = [&](Vector& v, const Vector& grad) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = nt_xent_loss(doc, pos, negs, tau);
      v[i] = keep - h;
      const double down = nt_xent_loss(doc, pos, negs, tau);
      v[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
  };
  check(doc, analytic.grad_doc);
  check(pos, analytic.grad_pos);
  for (std::size_t j = 0; j < negs.size(); ++j) check(negs[j], analytic.grad_negs[j]);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factsum: factuality-aware summarization corpus toolkit"};
  app.require_subcommand(1);
  Common c;

  auto* validate_cmd = app.add_subcommand("validate", "Check corpus records against the schema and invariants");
  add_io(validate_cmd, c);

  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  add_io(stats_cmd, c);

  std::string variant = "R1";
  int pool = 5;
  std::string mask_token = "<mask>";
  bool keep_short = false;
  std::string scorer_kind = "heuristic";
  RemoteBinding remote;
  long timeout_ms = 10000;
  auto* pretrain_cmd = app.add_subcommand("pretrain-data", "Build factGSG pseudo-summarization examples");
  add_io(pretrain_cmd, c);
  add_run_options(pretrain_cmd, c);
  pretrain_cmd->add_option("--variant", variant, "ROUGE variant for sentence scoring")
      ->check(CLI::IsMember({"R1", "R2", "RL"}))
      ->capture_default_str();
  pretrain_cmd->add_option("--candidate-pool", pool, "Sentences sent to the consistency scorer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pretrain_cmd->add_option("--mask-token", mask_token)->capture_default_str();
  pretrain_cmd->add_flag("--no-skip-short", keep_short, "Treat single-sentence documents as errors");
  pretrain_cmd->add_option("--scorer", scorer_kind)->check(CLI::IsMember({"heuristic", "remote"}))->capture_default_str();
  pretrain_cmd->add_option("--endpoint", remote.endpoint, "Remote scorer base URL");
  pretrain_cmd->add_option("--timeout-ms", timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
  pretrain_cmd->add_option("--max-concurrent", remote.max_concurrent)->check(CLI::PositiveNumber)->capture_default_str();

  std::string strategy = "combined";
  bool report_only = false;
  auto* correct_cmd = app.add_subcommand("correct", "Replace or remove hallucinated summary entities");
  add_io(correct_cmd, c);
  add_run_options(correct_cmd, c);
  correct_cmd->add_option("--strategy", strategy)
      ->check(CLI::IsMember({"replace", "remove", "combined"}))
      ->capture_default_str();
  correct_cmd->add_flag("--report", report_only, "Emit the detection report as TSV instead");

  std::string mode = "intrinsic";
  std::size_t k = 5;
  std::optional<std::uint64_t> seed;
  auto* negatives_cmd = app.add_subcommand("negatives", "Generate entity-perturbed negative summaries");
  add_io(negatives_cmd, c);
  add_run_options(negatives_cmd, c);
  negatives_cmd->add_option("--mode", mode)->check(CLI::IsMember({"intrinsic", "extrinsic"}))->capture_default_str();
  negatives_cmd->add_option("--k", k)->check(CLI::PositiveNumber)->capture_default_str();
  negatives_cmd->add_option("--seed", seed)->required();
  negatives_cmd->add_option("--bank-corpus", c.bank_corpus, "Corpus to harvest extrinsic entities from (default: input)");

  std::size_t position = 1;
  auto* connect_cmd = app.add_subcommand("connect", "Insert the mask token before a sentence");
  add_io(connect_cmd, c);
  add_run_options(connect_cmd, c);
  connect_cmd->add_option("--position", position)->check(CLI::PositiveNumber)->capture_default_str();
  connect_cmd->add_option("--mask-token", mask_token)->capture_default_str();

  std::string vectors_file;
  std::optional<double> tau_override;
  double fd_step = 1e-5;
  auto* loss_cmd = app.add_subcommand("loss-check", "Evaluate NT-Xent on vectors and check its gradient");
  loss_cmd->add_option("vectors", vectors_file, "JSON file {doc, pos, negs, tau}")->required();
  loss_cmd->add_option("--tau", tau_override);
  loss_cmd->add_option("--step", fd_step, "Finite-difference step")->capture_default_str();

  std::string config_file;
  std::string stages_flag;
  auto* run_cmd = app.add_subcommand("run", "Run several stages from a config file");
  add_io(run_cmd, c);
  add_run_options(run_cmd, c);
  run_cmd->add_option("--config", config_file, "Pipeline config (JSON)");
  run_cmd->add_option("--stages", stages_flag, "Comma-separated stages, overrides the config");
  run_cmd->add_option("--strategy", strategy);
  run_cmd->add_option("--mode", mode);
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--position", position);
  run_cmd->add_option("--mask-token", mask_token);
  run_cmd->add_option("--bank-corpus", c.bank_corpus);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    ReadOptions read{!c.lenient, RecordKind::Any, true};

    if (*validate_cmd) {
      auto summary = validate_stream(c.io.in(), c.io.out(), read);
      std::cerr << summary.records << " records, " << summary.invalid << " invalid\n";
      return summary.invalid ? kDataError : kOk;
    }
    if (*stats_cmd) {
      write_stats(c.io.out(), stats(c.io.in(), read));
      return kOk;
    }
    if (*loss_cmd) {
      std::ifstream f(vectors_file);
      if (!f) throw std::invalid_argument("cannot open '" + vectors_file + "'");
      const auto j = json::parse(f);
      Vector doc = j.at("doc").get<Vector>();
      Vector pos = j.at("pos").get<Vector>();
      std::vector<Vector> negs = j.value("negs", std::vector<Vector>{});
      const double tau = tau_override.value_or(j.value("tau", LossConfig{}.tau));
      const double loss = nt_xent_loss(doc, pos, negs, tau);
      const double err = max_gradient_error(doc, pos, negs, tau, fd_step);
      std::cout << std::setprecision(17) << "loss\t" << loss << "\nmax_grad_rel_error\t" << err << '\n';
      return kOk;
    }
    if (*correct_cmd && report_only) {
      write_detection_report(c.io.in(), c.io.out(), read);
      return kOk;
    }

    PipelineConfig config = base_config(c);
    config.selection.mask_token = mask_token;
    config.connector.mask_token = mask_token;

    if (*pretrain_cmd) {
      config.stages = {Stage::PretrainData};
      config.selection.variant = parse_rouge_variant(variant);
      config.selection.candidate_pool = pool;
      config.selection.skip_short_docs = !keep_short;
      if (scorer_kind == "remote") {
        remote.timeout = std::chrono::milliseconds(timeout_ms);
        config.scorer = remote;
      }
    } else if (*correct_cmd) {
      config.stages = {Stage::Correct};
      config.strategy = parse_strategy(strategy);
    } else if (*negatives_cmd) {
      config.stages = {Stage::Negatives};
      config.negatives = {parse_negative_mode(mode), k, seed, true};
    } else if (*connect_cmd) {
      config.stages = {Stage::Connect};
      config.connector.position = position;
    } else if (*run_cmd) {
      if (!config_file.empty()) {
        std::ifstream f(config_file);
        if (!f) throw std::invalid_argument("cannot open config '" + config_file + "'");
        config = config_from_json(json::parse(f), config);
      }
      // Flags given on the command line win over the config file.
      if (run_cmd->count("--workers")) config.workers = c.workers;
      if (run_cmd->count("--on-error")) config.on_error = c.on_error == "skip" ? ErrorPolicy::Skip : ErrorPolicy::Abort;
      if (run_cmd->count("--lenient")) config.strict_schema = false;
      if (run_cmd->count("--strategy")) config.strategy = parse_strategy(strategy);
      if (run_cmd->count("--mode")) config.negatives.mode = parse_negative_mode(mode);
      if (run_cmd->count("--seed")) config.negatives.seed = seed;
      if (run_cmd->count("--position")) config.connector.position = position;
      if (run_cmd->count("--mask-token")) config.selection.mask_token = config.connector.mask_token = mask_token;
      if (run_cmd->count("--stages")) {
        config.stages.clear();
        std::stringstream ss(stages_flag);
        for (std::string s; std::getline(ss, s, ',');) config.stages.push_back(parse_stage(s));
      }
    }
    try {
      validate_config(config);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsage;
    }
    return execute(config, c);
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}
