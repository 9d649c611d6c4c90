#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmboot/mspe.hpp"
#include "mmboot/simulate.hpp"

namespace mmboot::cli {

/// Shortest representation that round-trips.
std::string num(double v);

nlohmann::ordered_json config_json(const BootstrapConfig& cfg);

nlohmann::ordered_json fit_json(const Dataset& d, const FittedModel& fit, const MspeReport& report,
                                const BootstrapConfig& cfg);
void write_fit_csv(std::ostream& out, const Dataset& d, const MspeReport& report);

/// Writes a dataset in the input format read by `fit`.
void write_dataset_csv(std::ostream& out, const Dataset& d);

nlohmann::ordered_json study_json(const StudyResult& r);
void write_study_log(std::ostream& out, const StudyResult& r);

/// Summary table: one block per model with
/// a median line and a mean line; RB and CV per family, then RBN.
void render_table(std::ostream& out, const std::vector<StudyResult>& results);

}  // namespace mmboot::cli
