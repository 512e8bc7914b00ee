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

#ifndef PROSIM_REPORT_HPP_
#define PROSIM_REPORT_HPP_

#include <string>

#include "prosim/importance.hpp"

namespace prosim {

// In-memory renderings of the report files; the writer below materializes
// them. Exposed separately so tests can assert on content without disk I/O.
std::string ModelScoresCsv(const ImportanceReport& report);
std::string TypeImportanceCsv(const ImportanceReport& report);
std::string DimensionCorrelationsCsv(const ImportanceReport& report);
std::string PositionAnalysisCsv(const ImportanceReport& report);
std::string CorrelationByPositionSvg(const ImportanceReport& report);
std::string ImportanceByPositionSvg(const ImportanceReport& report);

// Writes model_scores.csv, type_importance.csv, dimension_correlations.csv,
// position_analysis.csv, fig_correlation_by_position.svg,
// fig_importance_by_position.svg and run_metadata.json into `dir`
// (created if needed). `run_metadata_json` is stored verbatim.
void WriteReportFiles(const std::string& dir, const ImportanceReport& report,
                      const std::string& run_metadata_json);

}  // namespace prosim

#endif  // PROSIM_REPORT_HPP_
