#pragma once

// JSON and CSV serialization. Matrices are row-major nested arrays.

#include "encctl/analysis.hpp"
#include "encctl/bootpoly.hpp"
#include "encctl/crypto_sim.hpp"
#include "encctl/simulator.hpp"
#include "encctl/statespace.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>

namespace encctl::io {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
/// Accepts a scalar (1x1), a flat array (column vector) or nested rows.
Matrix matrix_from_json(const Json& j, const std::string& name);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Either {"plant": {...}, "controller": {...}} or one flat object holding
/// A, B, B1, C, F1, C1, E, D1, Ac, Bc, B2, Cc, Dc, F2.
std::pair<Plant, Controller> system_from_json(const Json& j);
Json system_to_json(const Plant& p, const Controller& k);

Json poly_to_json(const BootstrapPolynomial& poly);
BootstrapPolynomial poly_from_json(const Json& j);

Json scheme_to_json(const toy::SchemeParams& s);
toy::SchemeParams scheme_from_json(const Json& j);

Json certificate_to_json(const SdpCertificate& c);
Json loop_to_json(const LoopMatrices& l);
Json report_to_json(const AnalysisReport& r);

Json simulation_summary(const SimulationResult& r);
/// t, x..., xc..., u..., y..., zp..., wp...
void write_trajectory_csv(const std::filesystem::path& path, const SimulationResult& r);
/// t, component, r, m_plus_e, poly_error, relative_error, status
void write_telemetry_csv(const std::filesystem::path& path, const SimulationResult& r);
/// m, p(m), m mod q, relative_error over verification points (thinned to `max_rows`).
void write_poly_csv(const std::filesystem::path& path, const BootstrapPolynomial& poly, std::size_t max_rows);

}  // namespace encctl::io
