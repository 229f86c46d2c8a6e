#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "medirl/config.hpp"
#include "medirl/error.hpp"
#include "medirl/experiment.hpp"
#include "medirl/io.hpp"

namespace medirl {

enum class VariantKind { Original, NoHiddenLayer, TwoDState, NoDiscount, LeakyRelu, MseLoss };

inline constexpr std::array<VariantKind, 6> kAllVariants{VariantKind::Original,   VariantKind::NoHiddenLayer,
                                                         VariantKind::TwoDState,  VariantKind::NoDiscount,
                                                         VariantKind::LeakyRelu,  VariantKind::MseLoss};

struct AblationVariant {
  VariantKind kind = VariantKind::Original;
  double alpha = 0.01;  // LeakyRelu only
};

inline std::string variant_name(VariantKind k) {
  switch (k) {
    case VariantKind::Original: return "Original";
    case VariantKind::NoHiddenLayer: return "NoHiddenLayer";
    case VariantKind::TwoDState: return "TwoDState";
    case VariantKind::NoDiscount: return "NoDiscount";
    case VariantKind::LeakyRelu: return "LeakyRelu";
    case VariantKind::MseLoss: return "MseLoss";
  }
  return "Original";
}

inline VariantKind variant_from_name(const std::string& name) {
  for (VariantKind k : kAllVariants)
    if (variant_name(k) == name) return k;
  fail(ErrorCode::invalid_config, "unknown ablation variant '" + name + "'");
}

/// Published replication ADEs (meters), in the published ranking order.
struct ReferenceAde {
  VariantKind kind;
  double ade;
};
inline constexpr std::array<ReferenceAde, 6> kPaperReference{{{VariantKind::TwoDState, 0.91},
                                                              {VariantKind::Original, 1.12},
                                                              {VariantKind::NoDiscount, 1.13},
                                                              {VariantKind::NoHiddenLayer, 1.14},
                                                              {VariantKind::MseLoss, 1.15},
                                                              {VariantKind::LeakyRelu, 1.15}}};

inline double paper_ade(VariantKind k) {
  for (const ReferenceAde& r : kPaperReference)
    if (r.kind == k) return r.ade;
  return std::numeric_limits<double>::quiet_NaN();
}

/// Derives a variant's config from the base. Structural variants that
/// would compound on an already-ablated config are rejected; the
/// parameter-setting ones are idempotent.
inline ExperimentConfig apply_variant(const ExperimentConfig& base, const AblationVariant& v) {
  ExperimentConfig cfg = base;
  switch (v.kind) {
    case VariantKind::Original:
      break;
    case VariantKind::NoHiddenLayer: {
      if (cfg.hidden.size() < 2)
        fail(ErrorCode::variant_inapplicable, "NoHiddenLayer needs at least two hidden layers");
      // Keep the wider of the first two hidden layers.
      const std::size_t drop = cfg.hidden[1].width <= cfg.hidden[0].width ? 1 : 0;
      cfg.hidden.erase(cfg.hidden.begin() + static_cast<std::ptrdiff_t>(drop));
      break;
    }
    case VariantKind::TwoDState:
      if (cfg.grid.dims != 3) fail(ErrorCode::variant_inapplicable, "TwoDState needs a 3D base grid");
      cfg.grid.dims = 2;
      cfg.grid.extent.resize(2);
      cfg.grid.origin[2] = 0.0;
      if (cfg.data.synthetic && cfg.data.synthetic->goal.size() == 3) cfg.data.synthetic->goal.resize(2);
      break;
    case VariantKind::NoDiscount:
      cfg.gamma = 1.0;
      break;
    case VariantKind::LeakyRelu:
      if (!(v.alpha > 0.0 && v.alpha < 1.0)) fail(ErrorCode::invalid_config, "leaky_relu alpha must lie in (0, 1)");
      for (HiddenLayer& h : cfg.hidden) {
        h.activation = Activation::leaky_relu;
        h.alpha = v.alpha;
      }
      break;
    case VariantKind::MseLoss:
      cfg.training.loss = LossKind::mse;
      break;
  }
  validate(cfg);
  return cfg;
}

struct AblationRow {
  std::string variant;
  std::string status = "ok";  // "ok" or an error code name
  std::string message;
  int epochs = 0;
  double final_loss = 0.0;
  EvaluationReport eval;
  double wall_seconds = 0.0;
  double paper_ade = 0.0;

  bool ok() const { return status == "ok"; }
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::vector<std::string> ranking;  // by mean ADE ascending, ties by name, failures last
};

inline std::vector<std::string> rank_rows(const std::vector<AblationRow>& rows) {
  std::vector<const AblationRow*> order;
  for (const AblationRow& r : rows) order.push_back(&r);
  auto key = [](const AblationRow* r) {
    return r->ok() ? r->eval.mean_ade : std::numeric_limits<double>::infinity();
  };
  std::sort(order.begin(), order.end(), [&](const AblationRow* a, const AblationRow* b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return a->variant < b->variant;
  });
  std::vector<std::string> out;
  for (const AblationRow* r : order) out.push_back(r->variant);
  return out;
}

/// report.json carries no timing so reruns are byte-identical.
inline nlohmann::json report_json(const AblationReport& rep) {
  using nlohmann::json;
  json rows = json::array();
  for (const AblationRow& r : rep.rows) {
    json row{{"variant", r.variant}, {"status", r.status}, {"paper_ade", r.paper_ade}};
    if (r.ok()) {
      row["epochs"] = r.epochs;
      row["final_loss"] = r.final_loss;
      row["mean_ade"] = r.eval.mean_ade;
      row["mean_fde"] = r.eval.mean_fde;
      row["mean_nde"] = r.eval.n_nde > 0 ? json(r.eval.mean_nde) : json(nullptr);
      row["n_test"] = r.eval.n;
    } else {
      row["message"] = r.message;
    }
    rows.push_back(row);
  }
  json paper_ranking = json::array();
  for (const ReferenceAde& ref : kPaperReference) paper_ranking.push_back(variant_name(ref.kind));
  return json{{"rows", rows}, {"ranking", rep.ranking}, {"paper_ranking", paper_ranking}};
}

/// report.csv: `variant,status,epochs,final_loss,mean_ade,mean_fde,mean_nde,paper_ade`.
inline std::string report_csv(const AblationReport& rep) {
  std::ostringstream out;
  out << "variant,status,epochs,final_loss,mean_ade,mean_fde,mean_nde,paper_ade\n";
  for (const AblationRow& r : rep.rows) {
    out << r.variant << ',' << r.status << ',';
    if (r.ok()) {
      out << r.epochs << ',' << format_double(r.final_loss) << ',' << format_double(r.eval.mean_ade) << ','
          << format_double(r.eval.mean_fde) << ',';
      if (r.eval.n_nde > 0) out << format_double(r.eval.mean_nde);
    } else {
      out << ",,,,";
    }
    out << ',' << format_double(r.paper_ade) << '\n';
  }
  return out.str();
}

/// Console table: local results in local ranking order beside the
/// published ADE and rank of each variant.
inline std::string format_report_table(const AblationReport& rep) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-4s %-14s %-20s %10s %10s %10s %12s %10s %10s\n", "rank", "variant", "status",
                "mean_ade", "mean_fde", "final_loss", "wall_s", "paper_ade", "paper_rank");
  out << line;
  for (std::size_t i = 0; i < rep.ranking.size(); ++i) {
    const auto it = std::find_if(rep.rows.begin(), rep.rows.end(),
                                 [&](const AblationRow& r) { return r.variant == rep.ranking[i]; });
    const AblationRow& r = *it;
    std::size_t paper_rank = 0;
    for (std::size_t k = 0; k < kPaperReference.size(); ++k)
      if (variant_name(kPaperReference[k].kind) == r.variant) paper_rank = k + 1;
    if (r.ok())
      std::snprintf(line, sizeof(line), "%-4zu %-14s %-20s %10.4f %10.4f %10.4f %12.2f %10.2f %10zu\n", i + 1,
                    r.variant.c_str(), r.status.c_str(), r.eval.mean_ade, r.eval.mean_fde, r.final_loss,
                    r.wall_seconds, r.paper_ade, paper_rank);
    else
      std::snprintf(line, sizeof(line), "%-4zu %-14s %-20s %10s %10s %10s %12.2f %10.2f %10zu\n", i + 1,
                    r.variant.c_str(), r.status.c_str(), "-", "-", "-", r.wall_seconds, r.paper_ade, paper_rank);
    out << line;
  }
  return out.str();
}

/// Runs every variant on one shared data set (resolved and split from the
/// base config) and writes
///   <out>/<variant>/{config.json,model.bin,loss.csv,timing.csv,metrics.csv,metrics.json}
///   <out>/report.{csv,json}, <out>/timing.csv
/// A failing variant is recorded in its row; the suite carries on.
inline AblationReport run_suite(const ExperimentConfig& base, const std::vector<AblationVariant>& variants,
                                const std::filesystem::path& out_dir,
                                const std::function<void(const std::string&)>& log = {},
                                const std::function<void(const std::string&, const EpochRecord&)>& on_epoch = {}) {
  if (variants.empty()) fail(ErrorCode::invalid_config, "no ablation variants requested");
  validate(base);
  ensure_directory(out_dir);
  const DataSplit split = split_data(resolve_data(base), base.split, base.seed);

  AblationReport rep;
  for (const AblationVariant& v : variants) {
    AblationRow row;
    row.variant = variant_name(v.kind);
    row.paper_ade = paper_ade(v.kind);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ExperimentConfig cfg = apply_variant(base, v);
      const std::filesystem::path dir = out_dir / row.variant;
      ensure_directory(dir);
      save_config(cfg, dir / "config.json");
      if (log) log("[" + row.variant + "] training");
      const TrainedModel model = train_experiment(cfg, split.train, [&](const EpochRecord& e) {
        if (on_epoch) on_epoch(row.variant, e);
        if (log)
          log("[" + row.variant + "] epoch " + std::to_string(e.epoch) + "/" + std::to_string(cfg.training.epochs) +
              " loss=" + format_double(e.loss));
      });
      save_model(model.net, (dir / "model.bin").string());
      write_text_file(dir / "loss.csv", format_loss_csv(model.result));
      write_text_file(dir / "timing.csv", format_timing_csv(model.result));
      row.eval = evaluate_experiment(cfg, model.net, split.test);
      write_text_file(dir / "metrics.csv", format_metrics_csv(row.eval));
      write_text_file(dir / "metrics.json", metrics_json(row.eval).dump(2) + "\n");
      row.epochs = cfg.training.epochs;
      row.final_loss = model.result.epochs.back().loss;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.code()));
      row.message = e.what();
    } catch (const std::exception& e) {
      row.status = "runtime-error";
      row.message = e.what();
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) log("[" + row.variant + "] " + row.status);
    rep.rows.push_back(std::move(row));
  }
  rep.ranking = rank_rows(rep.rows);

  write_text_file(out_dir / "report.json", report_json(rep).dump(2) + "\n");
  write_text_file(out_dir / "report.csv", report_csv(rep));
  std::ostringstream timing;
  timing << "variant,wall_seconds\n";
  for (const AblationRow& r : rep.rows) timing << r.variant << ',' << format_double(r.wall_seconds) << '\n';
  write_text_file(out_dir / "timing.csv", timing.str());
  return rep;
}

}  // namespace medirl
