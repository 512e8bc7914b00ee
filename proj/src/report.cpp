// Copyright (c) 2026 The prosim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prosim/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prosim/common.hpp"

namespace prosim {

namespace {

std::string OptionalField(const std::optional<double>& v) {
  return v.has_value() ? FormatDouble(*v) : std::string();
}

std::string WindowSpanLabel(size_t w) {
  const auto& bounds = WindowBoundariesPct();
  return FormatDouble(bounds[w]) + "-" + FormatDouble(bounds[w + 1]);
}

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("report: cannot open " + path.string());
  out << content;
  if (!out) throw Error("report: write failed for " + path.string());
}

// ---- minimal SVG line charts ----

struct Series {
  std::string name;
  std::string color;
  // x in [0, n-1]; missing y values are skipped (line breaks there).
  std::vector<std::optional<double>> values;
  bool right_axis = false;
};

std::string Svg(double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string LineChartSvg(const std::string& title,
                         const std::vector<std::string>& x_labels,
                         const std::vector<Series>& series,
                         const std::string& left_label,
                         const std::string& right_label) {
  const double width = 760, height = 420;
  const double ml = 64, mr = right_label.empty() ? 24 : 64, mt = 40, mb = 56;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;
  const size_t n = x_labels.size();

  auto range_of = [&](bool right) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const Series& s : series) {
      if (s.right_axis != right) continue;
      for (const auto& v : s.values) {
        if (!v) continue;
        if (!any) {
          lo = hi = *v;
          any = true;
        } else {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        }
      }
    }
    if (!any) return std::pair<double, double>(0.0, 1.0);
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    double pad = 0.08 * (hi - lo);
    return std::pair<double, double>(lo - pad, hi + pad);
  };
  auto [llo, lhi] = range_of(false);
  auto [rlo, rhi] = range_of(true);

  auto x_of = [&](size_t i) {
    if (n <= 1) return ml + plot_w / 2;
    return ml + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  auto y_of = [&](double v, bool right) {
    double lo = right ? rlo : llo, hi = right ? rhi : lhi;
    return mt + plot_h * (1.0 - (v - lo) / (hi - lo));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\""
      << ml + plot_w << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
  if (!right_label.empty()) {
    svg << "<line x1=\"" << ml + plot_w << "\" y1=\"" << mt << "\" x2=\""
        << ml + plot_w << "\" y2=\"" << mt + plot_h
        << "\" stroke=\"black\"/>\n";
  }

  // Y ticks: 5 per axis.
  for (int t = 0; t <= 4; ++t) {
    double frac = t / 4.0;
    double y = mt + plot_h * (1.0 - frac);
    double lv = llo + frac * (lhi - llo);
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << Svg(y) << "\" x2=\"" << ml
        << "\" y2=\"" << Svg(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << Svg(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << Svg(lv) << "</text>\n";
    if (!right_label.empty()) {
      double rv = rlo + frac * (rhi - rlo);
      svg << "<text x=\"" << ml + plot_w + 8 << "\" y=\"" << Svg(y + 4)
          << "\" text-anchor=\"start\" font-family=\"sans-serif\" "
          << "font-size=\"11\">" << Svg(rv) << "</text>\n";
    }
  }

  // X tick labels.
  for (size_t i = 0; i < n; ++i) {
    svg << "<text x=\"" << Svg(x_of(i)) << "\" y=\"" << mt + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << x_labels[i] << "</text>\n";
  }
  svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">utterance position (% of duration)</text>\n";
  svg << "<text transform=\"translate(16," << mt + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << left_label << "</text>\n";
  if (!right_label.empty()) {
    svg << "<text transform=\"translate(" << width - 14 << ","
        << mt + plot_h / 2
        << ") rotate(90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << right_label << "</text>\n";
  }

  // Series polylines (broken at missing values) and legend.
  double legend_y = mt + 6;
  for (const Series& s : series) {
    std::ostringstream points;
    bool in_run = false;
    for (size_t i = 0; i < s.values.size(); ++i) {
      if (!s.values[i]) {
        if (in_run) {
          svg << "<polyline fill=\"none\" stroke=\"" << s.color
              << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
          points.str("");
          in_run = false;
        }
        continue;
      }
      points << Svg(x_of(i)) << "," << Svg(y_of(*s.values[i], s.right_axis))
             << " ";
      in_run = true;
      svg << "<circle cx=\"" << Svg(x_of(i)) << "\" cy=\""
          << Svg(y_of(*s.values[i], s.right_axis)) << "\" r=\"2.5\" fill=\""
          << s.color << "\"/>\n";
    }
    if (in_run) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
    }
    svg << "<line x1=\"" << ml + plot_w - 150 << "\" y1=\"" << legend_y
        << "\" x2=\"" << ml + plot_w - 130 << "\" y2=\"" << legend_y
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + plot_w - 124 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name
        << "</text>\n";
    legend_y += 16;
  }

  svg << "</svg>\n";
  return svg.str();
}

const std::vector<std::string>& Palette() {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors;
}

}  // namespace

std::string ModelScoresCsv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "model,pearson,mse\n";
  for (const ModelScore& score : report.model_scores) {
    out << ModelKindName(score.kind) << "," << OptionalField(score.pearson)
        << "," << FormatDouble(score.mse) << "\n";
  }
  return out.str();
}

std::string TypeImportanceCsv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "feature_type,importance,only_correlation,ablation_correlation\n";
  for (const TypeImportanceRow& row : report.per_type) {
    out << BaseFeatureNames()[row.feature] << ","
        << FormatDouble(row.importance) << ","
        << OptionalField(row.only_correlation) << ","
        << OptionalField(row.ablation_correlation) << "\n";
  }
  return out.str();
}

std::string DimensionCorrelationsCsv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "dimension,feature_type,window,correlation,forest_importance\n";
  for (size_t d = 0; d < kNumDims; ++d) {
    out << DimensionLabels()[d] << ","
        << BaseFeatureNames()[d / kNumWindows] << "," << d % kNumWindows << ","
        << OptionalField(report.dimension_correlations[d]) << ","
        << FormatDouble(report.dimension_importance[d]) << "\n";
  }
  return out.str();
}

std::string PositionAnalysisCsv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "window,span_pct,only_correlation,summed_importance\n";
  for (const PositionImportanceRow& row : report.per_position) {
    out << row.window << "," << WindowSpanLabel(row.window) << ","
        << OptionalField(row.only_correlation) << ","
        << FormatDouble(row.summed_importance) << "\n";
  }
  return out.str();
}

std::string CorrelationByPositionSvg(const ImportanceReport& report) {
  std::vector<std::string> x_labels;
  for (size_t w = 0; w < kNumWindows; ++w) x_labels.push_back(WindowSpanLabel(w));

  // The five most important feature types, per the fold-averaged forest.
  size_t n_series = std::min<size_t>(5, report.per_type.size());
  std::vector<Series> series;
  for (size_t i = 0; i < n_series; ++i) {
    const TypeImportanceRow& row = report.per_type[i];
    Series s;
    s.name = BaseFeatureNames()[row.feature];
    s.color = Palette()[i % Palette().size()];
    for (size_t w = 0; w < kNumWindows; ++w) {
      s.values.push_back(
          report.dimension_correlations[row.feature * kNumWindows + w]);
    }
    series.push_back(std::move(s));
  }
  return LineChartSvg("Per-dimension correlation with judgments", x_labels,
                      series, "Pearson correlation", "");
}

std::string ImportanceByPositionSvg(const ImportanceReport& report) {
  std::vector<std::string> x_labels;
  for (size_t w = 0; w < kNumWindows; ++w) x_labels.push_back(WindowSpanLabel(w));

  Series corr;
  corr.name = "position-only model correlation";
  corr.color = Palette()[0];
  Series imp;
  imp.name = "summed forest importance";
  imp.color = Palette()[1];
  imp.right_axis = true;
  for (const PositionImportanceRow& row : report.per_position) {
    corr.values.push_back(row.only_correlation);
    imp.values.push_back(row.summed_importance);
  }
  return LineChartSvg("Feature importance by utterance position", x_labels,
                      {corr, imp}, "Pearson correlation", "summed importance");
}

void WriteReportFiles(const std::string& dir, const ImportanceReport& report,
                      const std::string& run_metadata_json) {
  std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  WriteFile(base / "model_scores.csv", ModelScoresCsv(report));
  WriteFile(base / "type_importance.csv", TypeImportanceCsv(report));
  WriteFile(base / "dimension_correlations.csv",
            DimensionCorrelationsCsv(report));
  WriteFile(base / "position_analysis.csv", PositionAnalysisCsv(report));
  WriteFile(base / "fig_correlation_by_position.svg",
            CorrelationByPositionSvg(report));
  WriteFile(base / "fig_importance_by_position.svg",
            ImportanceByPositionSvg(report));
  WriteFile(base / "run_metadata.json", run_metadata_json);
}

}  // namespace prosim
