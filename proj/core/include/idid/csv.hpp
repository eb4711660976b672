#pragma once

#include <filesystem>
#include <string>

#include "idid/dataset.hpp"

namespace idid {

// Cross-section files carry the header `<covariates...>,a,y,t,z`; panel files
// carry `<covariates...>,z,a0,y0,a1,y1`. Plain decimal-point floats, UTF-8,
// first row is the header. Any unparseable or missing cell fails with the
// offending row index; there is no missing-data handling.
Dataset read_dataset_csv(const std::filesystem::path& path);
PanelDataset read_panel_csv(const std::filesystem::path& path);

std::string dataset_to_csv(const Dataset& data);
std::string panel_to_csv(const PanelDataset& data);

// Writes via a temporary file in the same directory followed by a rename, so
// readers never observe a partially written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace idid
