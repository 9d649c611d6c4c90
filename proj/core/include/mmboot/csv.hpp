#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "mmboot/model.hpp"

namespace mmboot {

/// Reads observations in the format
///
///   cluster,y,s,x1,...,xr
///
/// Columns are located by header name; `s` is optional (default 1.0) and
/// covariate columns are every column named x<k>, in header order. Cluster
/// keys are arbitrary strings (double quotes allowed).
std::vector<Observation> read_observations_csv(std::istream& in);

Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_record(const std::string& line);

}  // namespace mmboot
