// dslga command-line pipeline: synthetic data generation, the two
// training stages over embedding files, retrieval evaluation, gradient
// verification, and report rendering.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 check failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dslga/config.hpp"
#include "dslga/errors.hpp"
#include "dslga/evaluate.hpp"
#include "dslga/gradcheck.hpp"
#include "dslga/io.hpp"
#include "dslga/pipeline.hpp"
#include "dslga/synth.hpp"

namespace fs = std::filesystem;
using namespace dslga;

namespace {

EmbeddingSet read_dataset(const std::string& base) {
  return read_embeddings(base + ".emb", base + ".csv");
}

void write_dataset(const EmbeddingSet& set, const std::string& base) {
  write_embeddings(set, base + ".emb", base + ".csv");
}

std::string labels_csv(const EmbeddingSet& set, const std::vector<int>& labels) {
  std::string out = "sample_id,label\n";
  for (int i = 0; i < set.n(); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    out += set.sample_id.empty() ? std::to_string(i) : set.sample_id[u];
    out += ',';
    out += std::to_string(labels[u]);
    out += '\n';
  }
  return out;
}

std::vector<int> read_labels_csv(const std::string& path, int expected_rows) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw MetadataParseError("expected sample_id,label", line_no);
    }
    labels.push_back(std::stoi(line.substr(comma + 1)));
  }
  if (expected_rows >= 0 && static_cast<int>(labels.size()) != expected_rows) {
    throw RowCountMismatchError("label file " + path + " has " +
                                std::to_string(labels.size()) + " rows, expected " +
                                std::to_string(expected_rows));
  }
  return labels;
}

// Config precedence: defaults < --config file < explicit flags.
struct ConfigFlags {
  std::string config_path;
  PipelineConfig staged;
  std::string kl_mode;
  bool cmcc_active = true;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> appliers;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)")
        ->check(CLI::ExistingFile);
    auto opt = [&](const char* flag, auto& slot, const char* help,
                   auto apply) {
      CLI::Option* o = cmd->add_option(flag, slot, help);
      appliers.emplace_back(o, apply);
    };
    opt("--eps1-v", staged.eps1_v, "visible coarse radius",
        [this](PipelineConfig& c) { c.eps1_v = staged.eps1_v; });
    opt("--eps2-v", staged.eps2_v, "visible fine radius",
        [this](PipelineConfig& c) { c.eps2_v = staged.eps2_v; });
    opt("--eps1-i", staged.eps1_i, "infrared coarse radius",
        [this](PipelineConfig& c) { c.eps1_i = staged.eps1_i; });
    opt("--eps2-i", staged.eps2_i, "infrared fine radius",
        [this](PipelineConfig& c) { c.eps2_i = staged.eps2_i; });
    opt("--min-pts", staged.min_pts, "density threshold",
        [this](PipelineConfig& c) { c.min_pts = staged.min_pts; });
    opt("--min-cluster-size", staged.min_cluster_size,
        "drop refined clusters smaller than this",
        [this](PipelineConfig& c) { c.min_cluster_size = staged.min_cluster_size; });
    opt("--alpha", staged.alpha, "memory EMA rate",
        [this](PipelineConfig& c) { c.alpha = staged.alpha; });
    opt("--beta", staged.beta, "cosine/Jaccard blend",
        [this](PipelineConfig& c) { c.beta = staged.beta; });
    opt("--rho", staged.rho, "supplementary acceptance threshold",
        [this](PipelineConfig& c) { c.rho = staged.rho; });
    opt("--tau", staged.tau, "holistic softmax temperature",
        [this](PipelineConfig& c) { c.tau = staged.tau; });
    opt("--psi", staged.psi, "consistency weight in the final loss",
        [this](PipelineConfig& c) { c.psi = staged.psi; });
    opt("--k-reciprocal", staged.k_reciprocal, "k for reciprocal neighbor sets",
        [this](PipelineConfig& c) { c.k_reciprocal = staged.k_reciprocal; });
    opt("--contrastive-temperature", staged.contrastive_temperature,
        "temperature of the contrastive terms", [this](PipelineConfig& c) {
          c.contrastive_temperature = staged.contrastive_temperature;
        });
    opt("--max-pair-cost", staged.max_pair_cost,
        "drop matched pairs above this cost (default: off)",
        [this](PipelineConfig& c) { c.max_pair_cost = staged.max_pair_cost; });
    opt("--seed", staged.seed, "run seed",
        [this](PipelineConfig& c) { c.seed = staged.seed; });
    CLI::Option* active = cmd->add_flag("--cmcc-active,!--no-cmcc-active",
                                        cmcc_active, "toggle the consistency term");
    appliers.emplace_back(active, [this](PipelineConfig& c) {
      c.cmcc_active = cmcc_active;
    });
    CLI::Option* kl = cmd->add_option("--cmcc-kl", kl_mode,
                                      "KL form: center or pairwise")
                          ->check(CLI::IsMember({"center", "pairwise"}));
    appliers.emplace_back(kl, [this](PipelineConfig& c) {
      c.kl_mode = kl_mode == "pairwise" ? CmccKlMode::pairwise_mean
                                        : CmccKlMode::center_to_center;
    });
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& [option, apply] : appliers) {
      if (option->count() > 0) apply(cfg);
    }
    cfg.validate();
    return cfg;
  }
};

void append_quality(StageReport& report, const std::string& prefix,
                    const QualityReport& q) {
  report.add(prefix + "_pairwise_precision", q.pairwise_precision);
  report.add(prefix + "_pairwise_recall", q.pairwise_recall);
  report.add(prefix + "_pairwise_f1", q.pairwise_f1);
  report.add(prefix + "_evaluated_pairs", static_cast<long long>(q.evaluated_pairs));
  report.add(prefix + "_discarded", static_cast<long long>(q.n_discarded));
}

std::vector<int> subset(const std::vector<int>& values,
                        const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(values[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-modality pseudo-label and loss pipeline"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  SynthConfig synth_cfg;
  std::string synth_out = ".";
  synth->add_option("--seed", synth_cfg.seed, "generator seed")->required();
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--n-identities", synth_cfg.n_identities, "identity count");
  synth->add_option("--samples", synth_cfg.samples_per_modality,
                    "samples per identity per modality per domain");
  synth->add_option("--dim", synth_cfg.dim, "embedding dimension");
  synth->add_option("--modality-offset", synth_cfg.modality_offset_scale,
                    "infrared rotation blend in [0,1]");
  synth->add_option("--domain-offset", synth_cfg.domain_offset_scale,
                    "target rotation blend in [0,1]");
  synth->add_option("--noise-std", synth_cfg.noise_std, "isotropic noise");
  synth->add_option("--missing-infrared", synth_cfg.identities_missing_in_infrared,
                    "highest identities absent from target infrared");

  // ---- pretrain ----
  auto* pretrain = app.add_subcommand("pretrain", "stage 1: per-modality labels and losses");
  std::string pre_source, pre_target, pre_out = ".", pre_truth, pre_probs;
  ConfigFlags pre_flags;
  pretrain->add_option("--source", pre_source, "source dataset base path")->required();
  pretrain->add_option("--target", pre_target, "target dataset base path")->required();
  pretrain->add_option("--out", pre_out, "output directory");
  pretrain->add_option("--truth", pre_truth, "ground-truth labels csv for quality metrics")
      ->check(CLI::ExistingFile);
  pretrain->add_option("--probs", pre_probs, "discriminator probabilities (.emb, n x 1)")
      ->check(CLI::ExistingFile);
  pre_flags.attach(pretrain);

  // ---- finetune ----
  auto* finetune = app.add_subcommand("finetune", "stage 2: joint labels and final loss");
  std::string fin_source, fin_target, fin_stage1, fin_out = ".", fin_truth, fin_probs;
  ConfigFlags fin_flags;
  finetune->add_option("--source", fin_source, "source dataset base path")->required();
  finetune->add_option("--target", fin_target, "target dataset base path")->required();
  finetune->add_option("--stage1", fin_stage1, "directory with stage-1 artifacts")->required();
  finetune->add_option("--out", fin_out, "output directory");
  finetune->add_option("--truth", fin_truth, "ground-truth labels csv for quality metrics")
      ->check(CLI::ExistingFile);
  finetune->add_option("--probs", fin_probs, "discriminator probabilities (.emb, n x 1)")
      ->check(CLI::ExistingFile);
  fin_flags.attach(finetune);

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "retrieval metrics over labeled sets");
  std::string eval_query, eval_gallery, eval_out;
  std::vector<int> eval_ranks{1, 5, 10, 20};
  eval->add_option("--query", eval_query, "query dataset base path")->required();
  eval->add_option("--gallery", eval_gallery, "gallery dataset base path")->required();
  eval->add_option("--ranks", eval_ranks, "CMC ranks")->delimiter(',');
  eval->add_option("--out", eval_out, "write metrics to this file");

  // ---- gradcheck ----
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  std::uint64_t gc_seed = 20240501;
  int gc_trials = 50;
  gradcheck->add_option("--seed", gc_seed, "suite seed");
  gradcheck->add_option("--trials", gc_trials, "instances per loss")
      ->check(CLI::PositiveNumber);

  // ---- report ----
  auto* report = app.add_subcommand("report", "merge stage reports into delimited text");
  std::vector<std::string> rep_in;
  std::string rep_out, rep_series;
  report->add_option("--in", rep_in, "report files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", rep_out, "merged delimited output")->required();
  report->add_option("--series", rep_series, "plot-ready CMC series file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) {
      const SynthData data = generate_synthetic(synth_cfg);
      fs::create_directories(synth_out);
      write_dataset(data.source, synth_out + "/source");
      write_dataset(data.target, synth_out + "/target");
      std::string truth = "sample_id,identity\n";
      for (int i = 0; i < data.target.n(); ++i) {
        truth += data.target.sample_id[static_cast<std::size_t>(i)];
        truth += ',';
        truth += std::to_string(data.target_truth[static_cast<std::size_t>(i)]);
        truth += '\n';
      }
      write_text_file(truth, synth_out + "/target_truth.csv");
      std::ostringstream echo;
      echo << "n_identities\t" << synth_cfg.n_identities << "\n"
           << "samples_per_modality\t" << synth_cfg.samples_per_modality << "\n"
           << "dim\t" << synth_cfg.dim << "\n"
           << "modality_offset_scale\t" << synth_cfg.modality_offset_scale << "\n"
           << "domain_offset_scale\t" << synth_cfg.domain_offset_scale << "\n"
           << "noise_std\t" << synth_cfg.noise_std << "\n"
           << "identities_missing_in_infrared\t"
           << synth_cfg.identities_missing_in_infrared << "\n"
           << "seed\t" << synth_cfg.seed << "\n";
      write_text_file(echo.str(), synth_out + "/synth_config.txt");
      std::cout << "wrote " << data.source.n() << " source and "
                << data.target.n() << " target samples to " << synth_out << "\n";
      return 0;
    }

    if (app.got_subcommand(pretrain)) {
      const PipelineConfig cfg = pre_flags.resolve();
      const EmbeddingSet source = read_dataset(pre_source);
      const EmbeddingSet target = read_dataset(pre_target);
      Eigen::VectorXd probs;
      const Eigen::VectorXd* probs_ptr = nullptr;
      if (!pre_probs.empty()) {
        probs = read_matrix(pre_probs).col(0);
        probs_ptr = &probs;
      }
      PretrainOutput out = run_pretrain_stage(cfg, source, target, probs_ptr);
      if (!pre_truth.empty()) {
        const std::vector<int> truth = read_labels_csv(pre_truth, target.n());
        const std::vector<int> v_rows = rows_with_modality(target, Modality::visible);
        const std::vector<int> i_rows = rows_with_modality(target, Modality::infrared);
        append_quality(out.report, "visible",
                       pairwise_label_metrics(out.crmr_v.labels, subset(truth, v_rows)));
        append_quality(out.report, "infrared",
                       pairwise_label_metrics(out.crmr_i.labels, subset(truth, i_rows)));
      }
      fs::create_directories(pre_out);
      write_text_file(labels_csv(target, out.target_labels),
                      pre_out + "/target_labels.csv");
      write_matrix(out.mem_sv.centers, pre_out + "/mem_sv.emb");
      write_matrix(out.mem_si.centers, pre_out + "/mem_si.emb");
      write_matrix(out.mem_tv.centers, pre_out + "/mem_tv.emb");
      write_matrix(out.mem_ti.centers, pre_out + "/mem_ti.emb");
      save_config(cfg, pre_out + "/config_used.cfg");
      write_text_file(out.report.to_text(), pre_out + "/pretrain_report.txt");
      std::cout << out.report.to_text();
      return 0;
    }

    if (app.got_subcommand(finetune)) {
      const PipelineConfig cfg = fin_flags.resolve();
      const EmbeddingSet source = read_dataset(fin_source);
      const EmbeddingSet target = read_dataset(fin_target);
      const CenterMemory mem_sv{read_matrix(fin_stage1 + "/mem_sv.emb"), cfg.alpha};
      const CenterMemory mem_si{read_matrix(fin_stage1 + "/mem_si.emb"), cfg.alpha};
      CenterMemory prev_tv, prev_ti;
      const CenterMemory* prev_tv_ptr = nullptr;
      const CenterMemory* prev_ti_ptr = nullptr;
      if (fs::exists(fin_stage1 + "/mem_tv.emb") &&
          fs::exists(fin_stage1 + "/mem_ti.emb")) {
        prev_tv = CenterMemory{read_matrix(fin_stage1 + "/mem_tv.emb"), cfg.alpha};
        prev_ti = CenterMemory{read_matrix(fin_stage1 + "/mem_ti.emb"), cfg.alpha};
        prev_tv_ptr = &prev_tv;
        prev_ti_ptr = &prev_ti;
      }
      Eigen::VectorXd probs;
      const Eigen::VectorXd* probs_ptr = nullptr;
      if (!fin_probs.empty()) {
        probs = read_matrix(fin_probs).col(0);
        probs_ptr = &probs;
      }
      FinetuneOutput out = run_finetune_stage(cfg, source, target, mem_sv, mem_si,
                                              prev_tv_ptr, prev_ti_ptr, probs_ptr);
      if (!fin_truth.empty()) {
        const std::vector<int> truth = read_labels_csv(fin_truth, target.n());
        append_quality(out.report, "joint",
                       pairwise_label_metrics(out.target_labels, truth));
        const std::vector<int> v_rows = rows_with_modality(target, Modality::visible);
        const std::vector<int> i_rows = rows_with_modality(target, Modality::infrared);
        Assignment kept;
        kept.pairs = out.sgm.kept_pairs;
        out.report.add("matching_accuracy",
                       matching_accuracy(
                           kept,
                           majority_identity(out.sgm.crmr_v.refined.clusters,
                                             subset(truth, v_rows)),
                           majority_identity(out.sgm.crmr_i.refined.clusters,
                                             subset(truth, i_rows))));
      }
      fs::create_directories(fin_out);
      write_text_file(labels_csv(target, out.target_labels),
                      fin_out + "/target_labels.csv");
      write_matrix(out.mem_tv.centers, fin_out + "/mem_tv.emb");
      write_matrix(out.mem_ti.centers, fin_out + "/mem_ti.emb");
      std::string conf = "identity,confidence,kl\n";
      for (std::size_t id = 0; id < out.cmcc.confidence.size(); ++id) {
        std::ostringstream row;
        row.precision(17);
        row << id << ',' << out.cmcc.confidence[id] << ',' << out.cmcc.kl[id] << '\n';
        conf += row.str();
      }
      write_text_file(conf, fin_out + "/confidence.csv");
      save_config(cfg, fin_out + "/config_used.cfg");
      write_text_file(out.report.to_text(), fin_out + "/finetune_report.txt");
      std::cout << out.report.to_text();
      return 0;
    }

    if (app.got_subcommand(eval)) {
      const EmbeddingSet query = read_dataset(eval_query);
      const EmbeddingSet gallery = read_dataset(eval_gallery);
      const RetrievalMetrics metrics = evaluate_retrieval(query, gallery, eval_ranks);
      std::cout << metrics.to_text();
      if (!eval_out.empty()) write_text_file(metrics.to_text(), eval_out);
      return 0;
    }

    if (app.got_subcommand(gradcheck)) {
      const auto reports = run_gradient_checks(gc_seed, gc_trials);
      for (const auto& r : reports) {
        std::cout << r.name << "\ttrials=" << r.trials
                  << "\tmax_rel_err=" << r.max_rel_err
                  << "\ttolerance=" << r.tolerance << "\t"
                  << (r.passed ? "PASS" : "FAIL") << "\n";
      }
      return all_passed(reports) ? 0 : 3;
    }

    if (app.got_subcommand(report)) {
      std::string merged = "file\tkey\tvalue\n";
      std::string series = "file\trank\tvalue\n";
      for (const auto& path : rep_in) {
        std::ifstream in(path);
        if (!in) throw FileError("cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          merged += path;
          merged += '\t';
          merged += line;
          merged += '\n';
          if (line.rfind("cmc@", 0) == 0) {
            const std::size_t tab = line.find('\t');
            series += path;
            series += '\t';
            series += line.substr(4, tab - 4);
            series += '\t';
            series += line.substr(tab + 1);
            series += '\n';
          }
        }
      }
      write_text_file(merged, rep_out);
      if (!rep_series.empty()) write_text_file(series, rep_series);
      std::cout << "merged " << rep_in.size() << " report(s) into " << rep_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
