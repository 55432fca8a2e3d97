#include "p2g/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "p2g/io.hpp"

namespace p2g {

namespace {

using nlohmann::json;

json summary_json(const DispatchSummary& s) {
  return {{"total_reward", s.total_reward}, {"gt_starts", s.gt_starts},   {"gt_hours", s.gt_hours},
          {"p2g_hours", s.p2g_hours},       {"bes_charge", s.bes_charge}, {"bes_discharge", s.bes_discharge}};
}

DispatchSummary summary_from(const json& j) {
  DispatchSummary s;
  s.total_reward = j.at("total_reward").get<double>();
  s.gt_starts = j.at("gt_starts").get<int>();
  s.gt_hours = j.at("gt_hours").get<int>();
  s.p2g_hours = j.at("p2g_hours").get<int>();
  s.bes_charge = j.at("bes_charge").get<int>();
  s.bes_discharge = j.at("bes_discharge").get<int>();
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string to_json_text(const OracleSummary& s) {
  const json j = {{"data_hash", s.data_hash},
                  {"horizon", s.horizon},
                  {"dp_value", s.dp_value},
                  {"dp_return", s.dp_return},
                  {"bes_only_return", s.bes_only_return},
                  {"sell_only_return", s.sell_only_return},
                  {"snap_allowance", s.snap_allowance},
                  {"dp_summary", summary_json(s.dp_summary)},
                  {"bes_only_summary", summary_json(s.bes_only_summary)}};
  return j.dump(2) + "\n";
}

OracleSummary oracle_summary_from_json(const std::string& text) {
  const json j = json::parse(text);
  OracleSummary s;
  s.data_hash = j.at("data_hash").get<std::string>();
  s.horizon = j.at("horizon").get<std::size_t>();
  s.dp_value = j.at("dp_value").get<double>();
  s.dp_return = j.at("dp_return").get<double>();
  s.bes_only_return = j.at("bes_only_return").get<double>();
  s.sell_only_return = j.at("sell_only_return").get<double>();
  s.snap_allowance = j.at("snap_allowance").get<double>();
  s.dp_summary = summary_from(j.at("dp_summary"));
  s.bes_only_summary = summary_from(j.at("bes_only_summary"));
  return s;
}

std::string to_json_text(const RunManifest& m) {
  const json j = {{"label", m.label},         {"algo", m.algo},   {"config_name", m.config_name},
                  {"data_hash", m.data_hash}, {"seeds", m.seeds}, {"horizon", m.horizon}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunManifest m;
  m.label = j.at("label").get<std::string>();
  m.algo = j.at("algo").get<std::string>();
  m.config_name = j.at("config_name").get<std::string>();
  m.data_hash = j.at("data_hash").get<std::string>();
  m.seeds = j.at("seeds").get<std::vector<long>>();
  m.horizon = j.at("horizon").get<std::size_t>();
  return m;
}

RunRecord load_run(const std::filesystem::path& dir) {
  const RunManifest m = manifest_from_json(read_file(dir / "manifest.json"));
  RunRecord r{m.label, m.algo, m.config_name, m.data_hash, {}, {}};
  std::istringstream eval(read_file(dir / "eval.csv"));
  r.reports = read_eval_csv(eval);
  for (long seed : m.seeds) {
    std::istringstream curve(read_file(dir / ("seed_" + std::to_string(seed)) / "curve.csv"));
    r.curves.push_back(TrainingCurve::read_csv(curve));
  }
  return r;
}

TableRow table_row(const std::string& label, const std::vector<EvalReport>& reports) {
  TableRow row;
  row.label = label;
  row.seeds = reports.size();
  auto column = [&](auto field) {
    std::vector<double> v;
    for (const EvalReport& r : reports) v.push_back(static_cast<double>(field(r)));
    return mean_std(v);
  };
  row.reward = column([](const EvalReport& r) { return r.episodic_reward; });
  row.gt_starts = column([](const EvalReport& r) { return r.gt_starts; });
  row.gt_hours = column([](const EvalReport& r) { return r.gt_hours; });
  row.p2g_hours = column([](const EvalReport& r) { return r.p2g_hours; });
  row.bes_charge = column([](const EvalReport& r) { return r.bes_charge; });
  row.bes_discharge = column([](const EvalReport& r) { return r.bes_discharge; });
  return row;
}

TableRow table_row(const std::string& label, const DispatchSummary& s) {
  EvalReport r{0, s.total_reward, s.gt_starts, s.gt_hours, s.p2g_hours, s.bes_charge, s.bes_discharge};
  return table_row(label, std::vector<EvalReport>{r});
}

void write_table_csv(const std::vector<TableRow>& rows, std::ostream& out) {
  out << "variant,seeds,episodic_reward_mean,episodic_reward_std,gt_starts,gt_hours,p2g_hours,bes_charge,"
         "bes_discharge\n";
  for (const TableRow& r : rows)
    out << r.label << ',' << r.seeds << ',' << format_double(r.reward.mean) << ',' << format_double(r.reward.std)
        << ',' << format_double(r.gt_starts.mean) << ',' << format_double(r.gt_hours.mean) << ','
        << format_double(r.p2g_hours.mean) << ',' << format_double(r.bes_charge.mean) << ','
        << format_double(r.bes_discharge.mean) << '\n';
}

void write_table_markdown(const std::vector<TableRow>& rows, std::ostream& out) {
  out << "| Variant | Episodic reward (k C$) | GT starts | GT hours | P2G hours | BES charge | BES discharge |\n"
      << "|---|---|---|---|---|---|---|\n";
  for (const TableRow& r : rows) {
    std::string reward = fixed(r.reward.mean / 1000.0, 1);
    if (r.seeds > 1) reward += " ± " + fixed(r.reward.std / 1000.0, 1);
    out << "| " << r.label << " | " << reward << " | " << fixed(r.gt_starts.mean, 1) << " | "
        << fixed(r.gt_hours.mean, 1) << " | " << fixed(r.p2g_hours.mean, 1) << " | " << fixed(r.bes_charge.mean, 1)
        << " | " << fixed(r.bes_discharge.mean, 1) << " |\n";
  }
}

std::vector<DominanceViolation> check_dominance(const RunRecord& run, const OracleSummary& oracle) {
  if (run.data_hash != oracle.data_hash)
    throw std::invalid_argument("check_dominance: run '" + run.label + "' was trained on a different instance");
  std::vector<DominanceViolation> out;
  for (const EvalReport& r : run.reports)
    if (r.episodic_reward > oracle.dp_return) out.push_back({run.label, r.seed, r.episodic_reward, oracle.dp_return});
  return out;
}

std::string training_curve_svg(const std::string& title, const std::vector<RunRecord>& runs,
                               const std::vector<ReferenceLine>& references) {
  constexpr double width = 760, height = 440, left = 80, right = 190, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

  struct Series {
    std::string label;
    std::vector<double> x, mean, lo, hi;
  };
  std::vector<Series> series;
  double x_max = 1, y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (const RunRecord& run : runs) {
    Series s{run.label, {}, {}, {}, {}};
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& c : run.curves) n = std::min(n, c.points.size());
    if (run.curves.empty()) n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v;
      for (const auto& c : run.curves) v.push_back(c.points[i].eval_return);
      const ReportStats st = mean_std(v);
      s.x.push_back(static_cast<double>(run.curves.front().points[i].step));
      s.mean.push_back(st.mean);
      s.lo.push_back(st.mean - st.std);
      s.hi.push_back(st.mean + st.std);
      x_max = std::max(x_max, s.x.back());
      y_min = std::min(y_min, s.lo.back());
      y_max = std::max(y_max, s.hi.back());
    }
    series.push_back(std::move(s));
  }
  for (const auto& r : references) {
    y_min = std::min(y_min, r.value);
    y_max = std::max(y_max, r.value);
  }
  if (!std::isfinite(y_min)) y_min = 0, y_max = 1;
  if (y_max - y_min < 1e-9) y_max = y_min + 1;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto px = [&](double x) { return left + plot_w * x / x_max; };
  auto py = [&](double y) { return top + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double yv = y_min + (y_max - y_min) * k / 5.0;
    const double xv = x_max * k / 5.0;
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fixed(yv / 1000.0, 1) << "k</text>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
        << static_cast<long>(std::lround(xv)) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">training steps</text>\n";
  svg << "<text transform=\"translate(18," << top + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">episodic reward (C$)</text>\n";

  double legend_y = top + 10;
  auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
    svg << "<line x1=\"" << left + plot_w + 12 << "\" x2=\"" << left + plot_w + 36 << "\" y1=\"" << legend_y
        << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << legend_y + 4 << "\">" << xml_escape(label)
        << "</text>\n";
    legend_y += 18;
  };

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const std::string color = colors[i % std::size(colors)];
    if (!s.x.empty()) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) svg << px(s.x[k]) << ',' << py(s.hi[k]) << ' ';
      for (std::size_t k = s.x.size(); k-- > 0;) svg << px(s.x[k]) << ',' << py(s.lo[k]) << ' ';
      svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) svg << px(s.x[k]) << ',' << py(s.mean[k]) << ' ';
      svg << "\"/>\n";
    }
    legend(s.label, color, false);
  }
  static const char* ref_colors[] = {"#000000", "#7f7f7f", "#bcbd22"};
  for (std::size_t i = 0; i < references.size(); ++i) {
    const std::string color = ref_colors[i % std::size(ref_colors)];
    svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << py(references[i].value)
        << "\" y2=\"" << py(references[i].value) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    legend(references[i].label, color, true);
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace p2g
