#include "prepbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "prepbench/adapter.hpp"
#include "prepbench/chart.hpp"
#include "prepbench/errors.hpp"

namespace prepbench::report {

const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::SpeedupByStage: return "speedup_by_stage";
    case ReportKind::SpeedupByPreparator: return "speedup_by_preparator";
    case ReportKind::IoRuntime: return "io_runtime";
    case ReportKind::EagerVsLazy: return "eager_vs_lazy";
    case ReportKind::ScalabilityCurves: return "scalability_curves";
    case ReportKind::MinConfigMatrix: return "min_config_matrix";
    case ReportKind::TpchBars: return "tpch_bars";
    case ReportKind::CompatibilityMatrix: return "compatibility_matrix";
  }
  return "?";
}

std::optional<ReportKind> report_kind_from_string(const std::string& s) {
  for (const ReportKind k :
       {ReportKind::SpeedupByStage, ReportKind::SpeedupByPreparator, ReportKind::IoRuntime,
        ReportKind::EagerVsLazy, ReportKind::ScalabilityCurves, ReportKind::MinConfigMatrix,
        ReportKind::TpchBars, ReportKind::CompatibilityMatrix})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

namespace {

using chart::Color;

struct CsvDoc {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
  }

  void write_md(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path.string());
    out << '|';
    for (const auto& h : header) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& row : rows) {
      out << '|';
      for (const auto& cell : row) out << ' ' << cell << " |";
      out << '\n';
    }
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<TimingRecord> load_inputs(const ReportSpec& spec) {
  std::vector<TimingRecord> records;
  for (const auto& input : spec.inputs) {
    auto part = load_records(input);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto excluded = [&](const TimingRecord& r) {
    return std::find(spec.exclude_engines.begin(), spec.exclude_engines.end(), r.engine) !=
           spec.exclude_engines.end();
  };
  std::erase_if(records, excluded);
  if (records.empty())
    throw IncompleteResults("no timing records under the given inputs");
  return records;
}

std::vector<orchestrator::SweepResult> load_sweep(const ReportSpec& spec) {
  std::vector<orchestrator::SweepResult> out;
  for (const auto& input : spec.inputs) {
    std::ifstream in(input);
    if (!in) throw IncompleteResults("cannot open sweep results " + input.string());
    nlohmann::json doc;
    in >> doc;
    for (const auto& j : doc) {
      orchestrator::SweepResult r;
      r.engine = j.at("engine").get<std::string>();
      r.dataset = j.value("dataset", "");
      r.sample_fraction = j.at("sample_fraction").get<double>();
      r.config = j.at("config").get<std::string>();
      if (const auto s = run_status_from_string(j.at("status").get<std::string>()))
        r.status = *s;
      if (j.contains("mean_wall_time")) r.mean_wall_time = j["mean_wall_time"].get<double>();
      out.push_back(std::move(r));
    }
  }
  if (out.empty()) throw IncompleteResults("no sweep results in the given inputs");
  return out;
}

bool is_figure(const std::string& format) { return format == "svg" || format == "png"; }

/// Grouped bar chart with a log y axis and the baseline rule at 1.
void draw_grouped_bars(chart::Surface& s, const std::vector<std::string>& groups,
                       const std::vector<std::string>& series,
                       const std::map<std::pair<std::string, std::string>, double>& values,
                       bool log_scale, bool baseline_rule, const std::string& y_label) {
  chart::Frame frame{60, 30, s.width() - 20, s.height() - 50, 1e9, 1e-9, log_scale};
  double vmin = 1e300, vmax = -1e300;
  for (const auto& [key, v] : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (log_scale) {
    frame.ymin = std::pow(10.0, std::floor(std::log10(std::max(1e-12, std::min(vmin, 1.0)))));
    frame.ymax = std::pow(10.0, std::ceil(std::log10(std::max(vmax, 1.0) * 1.01)));
  } else {
    frame.ymin = 0;
    frame.ymax = vmax * 1.1 + 1e-12;
  }
  frame.draw_axes(s, baseline_rule);
  s.text(14, 20, y_label, 10, -1);

  const double group_w = (frame.x1 - frame.x0) / std::max<std::size_t>(1, groups.size());
  const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, series.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = frame.x0 + group_w * (static_cast<double>(g) + 0.1);
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto it = values.find({groups[g], series[k]});
      if (it == values.end()) continue;
      const double top = frame.map_y(it->second);
      const double base = log_scale ? frame.map_y(frame.ymin) : frame.map_y(0.0);
      const Color color = chart::palette()[k % chart::palette().size()];
      s.rect(gx + bar_w * static_cast<double>(k), std::min(top, base), bar_w * 0.92,
             std::abs(base - top), color);
    }
    s.text(gx + group_w * 0.4, frame.y1 + 14, groups[g], 10, 0);
  }
  // Legend.
  double lx = frame.x0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Color color = chart::palette()[k % chart::palette().size()];
    s.rect(lx, 8, 9, 9, color);
    s.text(lx + 12, 16, series[k], 10, -1);
    lx += 14 + 7.0 * static_cast<double>(series[k].size()) + 10;
  }
}

std::filesystem::path finish(const ReportSpec& spec, const CsvDoc& doc,
                             const std::function<void(chart::Surface&)>& draw) {
  std::filesystem::create_directories(spec.output.parent_path().empty()
                                          ? "."
                                          : spec.output.parent_path());
  if (spec.format == "csv") {
    doc.write(spec.output);
    return spec.output;
  }
  if (spec.format == "md") {
    doc.write_md(spec.output);
    return spec.output;
  }
  if (!is_figure(spec.format))
    throw InvalidArgument("unknown report format '" + spec.format + "'");
  auto surface = chart::make_surface(spec.format, 860, 420);
  draw(*surface);
  surface->save(spec.output);
  // Machine-readable CSV beside every figure: humans read the plot, CI
  // asserts on the CSV.
  doc.write(std::filesystem::path(spec.output).concat(".csv"));
  return spec.output;
}

std::map<std::pair<std::string, std::string>, double> speedups_by_target(
    const ReportSpec& spec, const std::vector<metrics::AggregatedTime>& aggregates,
    std::vector<std::string>& targets, std::vector<std::string>& engines) {
  std::map<std::pair<std::string, std::string>, double> out;  // (target, engine) -> speedup
  std::map<std::string, const metrics::AggregatedTime*> baseline;
  for (const auto& a : aggregates)
    if (a.engine == spec.baseline_engine && a.mean_wall_time) baseline[a.target] = &a;
  if (baseline.empty())
    throw IncompleteResults("no usable baseline results for engine '" + spec.baseline_engine + "'");
  std::set<std::string> target_set, engine_set;
  for (const auto& a : aggregates) {
    if (a.engine == spec.baseline_engine || !a.mean_wall_time) continue;
    const auto it = baseline.find(a.target);
    if (it == baseline.end()) continue;
    out[{a.target, a.engine}] = metrics::speedup(*it->second, a).speedup;
    target_set.insert(a.target);
    engine_set.insert(a.engine);
  }
  if (out.empty()) throw IncompleteResults("no comparable (baseline, engine) target pairs");
  targets.assign(target_set.begin(), target_set.end());
  engines.assign(engine_set.begin(), engine_set.end());
  return out;
}

std::filesystem::path render_speedup_by_stage(const ReportSpec& spec) {
  const auto records = load_inputs(spec);
  std::vector<TimingRecord> stage_records;
  for (const auto& r : records)
    if (r.mode == Mode::PipelineStage) stage_records.push_back(r);
  if (stage_records.empty()) throw IncompleteResults("no pipeline-stage records");
  const auto aggregates = metrics::aggregate(stage_records);

  std::vector<std::string> targets, engines;
  const auto speedups = speedups_by_target(spec, aggregates, targets, engines);

  // Stages in pipeline order, not set order.
  std::vector<std::string> ordered;
  for (const Stage s : {Stage::IO, Stage::EDA, Stage::DT, Stage::DC})
    if (std::find(targets.begin(), targets.end(), to_string(s)) != targets.end())
      ordered.push_back(to_string(s));

  CsvDoc doc;
  doc.header = {"target", "engine", "speedup"};
  for (const auto& t : ordered)
    for (const auto& e : engines)
      if (speedups.count({t, e}))
        doc.rows.push_back({t, e, fmt(speedups.at({t, e}))});

  return finish(spec, doc, [&](chart::Surface& s) {
    draw_grouped_bars(s, ordered, engines, speedups, true, true, "speedup over baseline");
  });
}

std::filesystem::path render_speedup_by_preparator(const ReportSpec& spec) {
  const auto records = load_inputs(spec);
  std::vector<TimingRecord> core;
  for (const auto& r : records)
    if (r.mode == Mode::FunctionCore) core.push_back(r);
  if (core.empty()) throw IncompleteResults("no function-core records");
  const auto aggregates = metrics::aggregate(core);

  std::vector<std::string> targets, engines;
  const auto speedups = speedups_by_target(spec, aggregates, targets, engines);
  const auto impacts = metrics::impact_from_records(core);
  std::map<std::string, double> impact_of;
  for (const auto& i : impacts) impact_of[to_string(i.preparator)] = i.impact_pct;

  // Preparators in canonical vocabulary order.
  std::vector<std::string> ordered;
  for (const Preparator p : all_preparators())
    if (std::find(targets.begin(), targets.end(), to_string(p)) != targets.end())
      ordered.push_back(to_string(p));

  CsvDoc doc;
  doc.header = {"preparator", "stage", "impact_pct", "engine", "speedup"};
  for (const auto& t : ordered) {
    const auto prep = preparator_from_string(t);
    for (const auto& e : engines)
      if (speedups.count({t, e}))
        doc.rows.push_back({t, std::string(to_string(stage_of(*prep))),
                            impact_of.count(t) ? fmt(impact_of.at(t)) : "",
                            e, fmt(speedups.at({t, e}))});
  }

  return finish(spec, doc, [&](chart::Surface& s) {
    chart::Frame frame{60, 30, s.width() - 20, s.height() - 60, 0.01, 100, true};
    double vmax = 1;
    for (const auto& [k, v] : speedups) vmax = std::max(vmax, v);
    frame.ymax = std::pow(10.0, std::ceil(std::log10(vmax * 1.01)));
    frame.draw_axes(s, true);
    const double slot = (frame.x1 - frame.x0) / std::max<std::size_t>(1, ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      const double cx = frame.x0 + slot * (static_cast<double>(i) + 0.5);
      // Impact bar in the background, scaled to the plot height.
      if (impact_of.count(ordered[i])) {
        const double h = (frame.y1 - frame.y0) * impact_of.at(ordered[i]) / 100.0;
        s.rect(cx - slot * 0.35, frame.y1 - h, slot * 0.7, h, {225, 225, 225});
      }
      for (std::size_t k = 0; k < engines.size(); ++k) {
        const auto it = speedups.find({ordered[i], engines[k]});
        if (it == speedups.end()) continue;
        s.circle(cx, frame.map_y(it->second), 3.5,
                 chart::palette()[k % chart::palette().size()]);
      }
      s.text(cx, frame.y1 + 14, ordered[i], 8, 0);
    }
    double lx = frame.x0;
    for (std::size_t k = 0; k < engines.size(); ++k) {
      s.rect(lx, 8, 9, 9, chart::palette()[k % chart::palette().size()]);
      s.text(lx + 12, 16, engines[k], 10, -1);
      lx += 14 + 7.0 * static_cast<double>(engines[k].size()) + 10;
    }
  });
}

std::filesystem::path render_io_runtime(const ReportSpec& spec) {
  const auto records = load_inputs(spec);
  std::vector<TimingRecord> io;
  for (const auto& r : records)
    if (r.mode == Mode::FunctionCore && (r.target == "read" || r.target == "write"))
      io.push_back(r);
  if (io.empty()) throw IncompleteResults("no read/write function-core records");
  const auto aggregates = metrics::aggregate(io);

  std::set<std::string> engine_set;
  std::map<std::pair<std::string, std::string>, double> means;  // (target, engine)
  for (const auto& a : aggregates) {
    if (!a.mean_wall_time) continue;
    means[{a.target, a.engine}] = *a.mean_wall_time;
    engine_set.insert(a.engine);
  }
  std::vector<std::string> engines(engine_set.begin(), engine_set.end());
  std::vector<std::string> targets = {"read", "write"};

  CsvDoc doc;
  doc.header = {"target", "engine", "mean_wall_time"};
  for (const auto& t : targets)
    for (const auto& e : engines)
      if (means.count({t, e})) doc.rows.push_back({t, e, fmt(means.at({t, e}))});

  return finish(spec, doc, [&](chart::Surface& s) {
    draw_grouped_bars(s, targets, engines, means, false, false, "seconds (lower is better)");
  });
}

std::filesystem::path render_eager_vs_lazy(const ReportSpec& spec) {
  const auto records = load_inputs(spec);
  // Per engine: forced per-step total (function-core) vs whole-pipeline run.
  std::map<std::string, double> forced_total, full_mean;
  const auto aggregates = metrics::aggregate(records);
  for (const auto& a : aggregates) {
    if (!a.mean_wall_time) continue;
    if (a.mode == Mode::FunctionCore) forced_total[a.engine] += *a.mean_wall_time;
    if (a.mode == Mode::PipelineFull) full_mean[a.engine] = *a.mean_wall_time;
  }
  std::vector<std::string> engines;
  for (const auto& [e, t] : forced_total)
    if (full_mean.count(e)) engines.push_back(e);
  if (engines.empty())
    throw IncompleteResults("need both function-core and pipeline-full results per engine");

  CsvDoc doc;
  doc.header = {"engine", "forced_total_s", "pipeline_full_s", "improvement_pct"};
  std::map<std::pair<std::string, std::string>, double> values;
  for (const auto& e : engines) {
    const double forced = forced_total[e];
    const double full = full_mean[e];
    const double improvement = forced > 0 ? (forced - full) / forced * 100.0 : 0.0;
    doc.rows.push_back({e, fmt(forced), fmt(full), fmt(improvement)});
    values[{e, "forced per-step"}] = forced;
    values[{e, "whole pipeline"}] = full;
  }

  return finish(spec, doc, [&](chart::Surface& s) {
    draw_grouped_bars(s, engines, {"forced per-step", "whole pipeline"}, values, false, false,
                      "seconds");
    // Annotate the improvement over the forced execution.
    chart::Frame frame{60, 30, s.width() - 20, s.height() - 50, 0, 1, false};
    for (std::size_t g = 0; g < engines.size(); ++g) {
      const double improvement =
          (forced_total[engines[g]] - full_mean[engines[g]]) / forced_total[engines[g]] * 100.0;
      const double group_w = (frame.x1 - frame.x0) / static_cast<double>(engines.size());
      char label[32];
      std::snprintf(label, sizeof label, "%+.1f%%", improvement);
      s.text(frame.x0 + group_w * (static_cast<double>(g) + 0.5), 40, label, 10, 0);
    }
  });
}

std::filesystem::path render_scalability_curves(const ReportSpec& spec) {
  const auto sweep = load_sweep(spec);
  std::set<std::string> engine_set;
  std::set<double> fraction_set;
  for (const auto& r : sweep) {
    engine_set.insert(r.engine);
    fraction_set.insert(r.sample_fraction);
  }
  std::vector<std::string> engines(engine_set.begin(), engine_set.end());
  std::vector<double> fractions(fraction_set.begin(), fraction_set.end());

  CsvDoc doc;
  doc.header = {"engine", "sample_fraction", "config", "status", "mean_wall_time"};
  for (const auto& r : sweep)
    doc.rows.push_back({r.engine, fmt(r.sample_fraction), r.config,
                        to_string(r.status), r.mean_wall_time ? fmt(*r.mean_wall_time) : ""});

  return finish(spec, doc, [&](chart::Surface& s) {
    chart::Frame frame{60, 30, s.width() - 20, s.height() - 50, 1e-3, 1.0, true};
    double vmax = 1e-3;
    for (const auto& r : sweep)
      if (r.mean_wall_time) vmax = std::max(vmax, *r.mean_wall_time);
    frame.ymax = std::pow(10.0, std::ceil(std::log10(vmax * 1.1)));
    frame.draw_axes(s, false);
    const auto map_x = [&](double f) {
      return frame.x0 + (frame.x1 - frame.x0) * f / 100.0;
    };
    for (std::size_t k = 0; k < engines.size(); ++k) {
      const Color color = chart::palette()[k % chart::palette().size()];
      double px = -1, py = -1;
      for (const double f : fractions) {
        for (const auto& r : sweep) {
          if (r.engine != engines[k] || r.sample_fraction != f) continue;
          const double x = map_x(f);
          if (r.mean_wall_time) {
            const double y = frame.map_y(*r.mean_wall_time);
            if (px >= 0) s.line(px, py, x, y, color, 1.5);
            s.circle(x, y, 3, color);
            px = x;
            py = y;
          } else {
            s.text(x, frame.y0 + 12, "x", 12, 0, chart::kRed);  // OOM / failure marker
            px = -1;
          }
        }
      }
      s.rect(frame.x0 + 110.0 * static_cast<double>(k), 8, 9, 9, color);
      s.text(frame.x0 + 110.0 * static_cast<double>(k) + 12, 16, engines[k], 10, -1);
    }
    for (const double f : fractions)
      s.text(map_x(f), frame.y1 + 14, fmt(f) + "%", 9, 0);
  });
}

std::filesystem::path render_min_config_matrix(const ReportSpec& spec) {
  const auto sweep = load_sweep(spec);
  std::set<std::string> engine_set;
  std::set<double> fraction_set;
  std::map<std::pair<std::string, double>, std::string> cell;
  for (const auto& r : sweep) {
    engine_set.insert(r.engine);
    fraction_set.insert(r.sample_fraction);
    cell[{r.engine, r.sample_fraction}] = r.config;
  }
  std::vector<std::string> engines(engine_set.begin(), engine_set.end());
  std::vector<double> fractions(fraction_set.begin(), fraction_set.end());
  for (const auto& e : engines)
    for (const double f : fractions)
      if (!cell.count({e, f}))
        throw IncompleteResults("missing sweep cell (" + e + ", " + fmt(f) + "%)");

  CsvDoc doc;
  doc.header = {"engine"};
  for (const double f : fractions) doc.header.push_back(fmt(f) + "%");
  for (const auto& e : engines) {
    std::vector<std::string> row{e};
    for (const double f : fractions) row.push_back(cell.at({e, f}));
    doc.rows.push_back(std::move(row));
  }

  return finish(spec, doc, [&](chart::Surface& s) {
    const std::map<std::string, Color> colors = {
        {"laptop", {144, 190, 109}},
        {"workstation", {254, 220, 151}},
        {"server", {249, 132, 74}},
        {"x", {210, 210, 210}},
    };
    const double x0 = 120, y0 = 40;
    const double cw = (s.width() - x0 - 20) / static_cast<double>(fractions.size());
    const double ch = (s.height() - y0 - 40) / static_cast<double>(engines.size());
    for (std::size_t i = 0; i < fractions.size(); ++i)
      s.text(x0 + cw * (static_cast<double>(i) + 0.5), y0 - 8, fmt(fractions[i]) + "%", 10, 0);
    for (std::size_t r = 0; r < engines.size(); ++r) {
      s.text(x0 - 8, y0 + ch * (static_cast<double>(r) + 0.6), engines[r], 10, 1);
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        const std::string& value = cell.at({engines[r], fractions[i]});
        const auto color = colors.count(value) ? colors.at(value) : chart::kWhite;
        s.rect(x0 + cw * static_cast<double>(i), y0 + ch * static_cast<double>(r), cw, ch, color,
               true);
        if (value == "x")
          s.text(x0 + cw * (static_cast<double>(i) + 0.5),
                 y0 + ch * (static_cast<double>(r) + 0.65), "x", 12, 0);
      }
    }
    double lx = x0;
    for (const auto& [name, color] : colors) {
      s.rect(lx, s.height() - 24, 9, 9, color, true);
      s.text(lx + 12, s.height() - 16, name == "x" ? "OOM" : name, 10, -1);
      lx += 110;
    }
  });
}

std::filesystem::path render_tpch_bars(const ReportSpec& spec) {
  const auto records = load_inputs(spec);
  std::vector<TimingRecord> tpch_records;
  for (const auto& r : records)
    if (r.pipeline == "tpch") tpch_records.push_back(r);
  if (tpch_records.empty()) throw IncompleteResults("no tpch records in inputs");
  const auto aggregates = metrics::aggregate(tpch_records);

  std::set<std::string> engine_set, query_set;
  std::map<std::pair<std::string, std::string>, double> means;
  for (const auto& a : aggregates) {
    if (!a.mean_wall_time) continue;
    means[{a.target, a.engine}] = *a.mean_wall_time;
    engine_set.insert(a.engine);
    query_set.insert(a.target);
  }
  std::vector<std::string> engines(engine_set.begin(), engine_set.end());
  std::vector<std::string> queries(query_set.begin(), query_set.end());

  CsvDoc doc;
  doc.header = {"query", "engine", "mean_wall_time"};
  for (const auto& q : queries)
    for (const auto& e : engines)
      if (means.count({q, e})) doc.rows.push_back({q, e, fmt(means.at({q, e}))});

  return finish(spec, doc, [&](chart::Surface& s) {
    draw_grouped_bars(s, queries, engines, means, true, false, "seconds (lower is better)");
  });
}

std::filesystem::path render_compatibility_matrix(const ReportSpec& spec) {
  register_builtin_adapters();
  auto& registry = AdapterRegistry::instance();
  std::vector<std::string> engines;
  for (const auto& name : registry.names()) {
    if (std::find(spec.exclude_engines.begin(), spec.exclude_engines.end(), name) !=
        spec.exclude_engines.end())
      continue;
    engines.push_back(name);
  }
  if (engines.empty()) throw IncompleteResults("no engines registered");

  const std::map<CompatibilityLevel, std::string> symbol = {
      {CompatibilityLevel::FullMatch, "full"},
      {CompatibilityLevel::DifferentInterface, "different"},
      {CompatibilityLevel::CustomImplemented, "custom"},
  };

  CsvDoc doc;
  doc.header = {"stage", "preparator"};
  for (const auto& e : engines) doc.header.push_back(e);
  for (const Preparator p : all_preparators()) {
    std::vector<std::string> row{to_string(stage_of(p)), to_string(p)};
    for (const auto& e : engines) row.push_back(symbol.at(registry.compatibility(e, p)));
    doc.rows.push_back(std::move(row));
  }

  return finish(spec, doc, [&](chart::Surface& s) {
    const std::map<std::string, Color> colors = {
        {"full", {144, 190, 109}}, {"different", {254, 220, 151}}, {"custom", {249, 132, 74}}};
    const double x0 = 150, y0 = 40;
    const double cw = (s.width() - x0 - 20) / static_cast<double>(engines.size());
    const double ch = (s.height() - y0 - 16) / static_cast<double>(kPreparatorCount);
    for (std::size_t e = 0; e < engines.size(); ++e)
      s.text(x0 + cw * (static_cast<double>(e) + 0.5), y0 - 8, engines[e], 10, 0);
    std::size_t r = 0;
    for (const Preparator p : all_preparators()) {
      s.text(x0 - 8, y0 + ch * (static_cast<double>(r) + 0.9), to_string(p), 8, 1);
      for (std::size_t e = 0; e < engines.size(); ++e) {
        const auto level = AdapterRegistry::instance().compatibility(engines[e], p);
        s.rect(x0 + cw * static_cast<double>(e), y0 + ch * static_cast<double>(r), cw, ch,
               colors.at(symbol.at(level)), true);
      }
      ++r;
    }
  });
}

}  // namespace

std::filesystem::path render(const ReportSpec& spec) {
  switch (spec.kind) {
    case ReportKind::SpeedupByStage: return render_speedup_by_stage(spec);
    case ReportKind::SpeedupByPreparator: return render_speedup_by_preparator(spec);
    case ReportKind::IoRuntime: return render_io_runtime(spec);
    case ReportKind::EagerVsLazy: return render_eager_vs_lazy(spec);
    case ReportKind::ScalabilityCurves: return render_scalability_curves(spec);
    case ReportKind::MinConfigMatrix: return render_min_config_matrix(spec);
    case ReportKind::TpchBars: return render_tpch_bars(spec);
    case ReportKind::CompatibilityMatrix: return render_compatibility_matrix(spec);
  }
  throw InvalidArgument("unknown report kind");
}

}  // namespace prepbench::report
