#pragma once

// File formats: counts JSON (also the ingestion path for externally
// measured data), basis-set JSON, report JSON, sweep config JSON, and the
// results CSV. Readers are strict: unknown keys are rejected.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pstomo/basis.hpp"
#include "pstomo/measure.hpp"
#include "pstomo/metrics.hpp"
#include "pstomo/reconstruct.hpp"

namespace pstomo::io {

using json = nlohmann::json;

struct CountsFile {
    int dimension = 0;
    PairBasisParams params;
    std::array<CountRecord, 3> records;  // normalized to B0, B1p, B3p order
};

json counts_file_to_json(const CountsFile& file);
CountsFile counts_file_from_json(const json& j);

json basis_set_to_json(const ThreeBasisSet& set);
ThreeBasisSet basis_set_from_json(const json& j);

json report_to_json(const EstimationReport& report,
                    std::optional<double> truth_infidelity = std::nullopt);

SweepConfig sweep_config_from_json(const json& j);

std::string sweep_csv(const std::vector<SweepRow>& rows);

// Comma-separated complex literals: "1", "-0.5", "2i", "0.157+0.295i".
std::vector<cx> parse_state_literal(const std::string& text);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pstomo::io
