#include "encctl/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace encctl::io {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& name) {
    if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array()) throw std::invalid_argument("matrix '" + name + "' must be a number or an array");
    if (j.empty()) return Matrix(0, 0);
    if (!j[0].is_array()) {
        Matrix v(j.size(), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw std::invalid_argument("matrix '" + name + "' has a non-numeric entry");
            v(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
        }
        return v;
    }
    const std::size_t cols = j[0].size();
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw std::invalid_argument("matrix '" + name + "' is ragged");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw std::invalid_argument("matrix '" + name + "' has a non-numeric entry");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setw(2) << j << '\n';
}

namespace {

Matrix field(const Json& obj, const char* key) {
    if (!obj.contains(key)) throw std::invalid_argument(std::string("system JSON is missing field '") + key + "'");
    return matrix_from_json(obj.at(key), key);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::pair<Plant, Controller> system_from_json(const Json& j) {
    const Json& pj = j.contains("plant") ? j.at("plant") : j;
    const Json& kj = j.contains("controller") ? j.at("controller") : j;
    Plant p{field(pj, "A"),  field(pj, "B"),  field(pj, "B1"), field(pj, "C"),
            field(pj, "F1"), field(pj, "C1"), field(pj, "E"),  field(pj, "D1")};
    Controller k{field(kj, "Ac"), field(kj, "Bc"), field(kj, "B2"), field(kj, "Cc"), field(kj, "Dc"), field(kj, "F2")};
    p.validate();
    k.validate();
    return {p, k};
}

Json system_to_json(const Plant& p, const Controller& k) {
    return {{"plant",
             {{"A", matrix_to_json(p.A)},
              {"B", matrix_to_json(p.B)},
              {"B1", matrix_to_json(p.B1)},
              {"C", matrix_to_json(p.C)},
              {"F1", matrix_to_json(p.F1)},
              {"C1", matrix_to_json(p.C1)},
              {"E", matrix_to_json(p.E)},
              {"D1", matrix_to_json(p.D1)}}},
            {"controller",
             {{"Ac", matrix_to_json(k.Ac)},
              {"Bc", matrix_to_json(k.Bc)},
              {"B2", matrix_to_json(k.B2)},
              {"Cc", matrix_to_json(k.Cc)},
              {"Dc", matrix_to_json(k.Dc)},
              {"F2", matrix_to_json(k.F2)}}}};
}

Json poly_to_json(const BootstrapPolynomial& poly) {
    const double R = poly.spec.domain_radius();
    return {{"spec", {{"q", poly.spec.q}, {"epsilon", poly.spec.epsilon}, {"K", poly.spec.K}, {"d", poly.spec.degree}}},
            {"basis", "chebyshev"},
            {"interval", {-R, R}},
            {"coefficients", std::vector<double>(poly.coefficients.data(),
                                                 poly.coefficients.data() + poly.coefficients.size())},
            {"gamma_certified", poly.gamma_certified},
            {"verification_samples", poly.verification_samples},
            {"lp_gamma", poly.lp_gamma},
            {"usable", poly.usable()}};
}

BootstrapPolynomial poly_from_json(const Json& j) {
    BootstrapPolynomial p;
    const Json& s = j.at("spec");
    p.spec.q = s.at("q").get<double>();
    p.spec.epsilon = s.at("epsilon").get<double>();
    p.spec.K = s.at("K").get<int>();
    p.spec.degree = s.at("d").get<int>();
    p.spec.validate();
    if (get_or<std::string>(j, "basis", "chebyshev") != "chebyshev")
        throw std::invalid_argument("polynomial JSON: only the chebyshev basis is supported");
    const auto c = j.at("coefficients").get<std::vector<double>>();
    if (static_cast<int>(c.size()) != p.spec.degree + 1)
        throw std::invalid_argument("polynomial JSON: expected d + 1 coefficients");
    p.coefficients = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    p.gamma_certified = j.at("gamma_certified").get<double>();
    p.verification_samples = get_or<std::int64_t>(j, "verification_samples", 0);
    p.lp_gamma = get_or<double>(j, "lp_gamma", p.gamma_certified);
    return p;
}

Json scheme_to_json(const toy::SchemeParams& s) {
    return {{"n", s.n},
            {"q0", s.q0},
            {"c", s.c},
            {"L", s.L},
            {"noise_bound", s.noise_bound},
            {"seed", s.seed},
            {"hamming_weight", s.hamming_weight},
            {"public_key_rows", s.public_key_rows}};
}

toy::SchemeParams scheme_from_json(const Json& j) {
    toy::SchemeParams s;
    s.n = get_or(j, "n", s.n);
    s.q0 = get_or(j, "q0", s.q0);
    s.c = get_or(j, "c", s.c);
    s.L = get_or(j, "L", s.L);
    s.noise_bound = get_or(j, "noise_bound", s.noise_bound);
    s.seed = get_or(j, "seed", s.seed);
    s.hamming_weight = get_or(j, "hamming_weight", s.hamming_weight);
    s.public_key_rows = get_or(j, "public_key_rows", s.public_key_rows);
    s.validate();
    return s;
}

Json certificate_to_json(const SdpCertificate& c) {
    return {{"X", matrix_to_json(c.X)},
            {"tau", c.tau},
            {"margin", c.margin_achieved},
            {"iterations", c.solver_iterations}};
}

Json loop_to_json(const LoopMatrices& l) {
    return {{"A", matrix_to_json(l.A)},   {"Bp", matrix_to_json(l.Bp)},   {"Bu", matrix_to_json(l.Bu)},
            {"Cp", matrix_to_json(l.Cp)}, {"Dpp", matrix_to_json(l.Dpp)}, {"Dpu", matrix_to_json(l.Dpu)},
            {"Cu", matrix_to_json(l.Cu)}, {"Dup", matrix_to_json(l.Dup)}, {"Duu", matrix_to_json(l.Duu)}};
}

Json report_to_json(const AnalysisReport& r) {
    Json j = {{"verdict", to_string(r.verdict)},
              {"gain", r.gain ? Json(*r.gain) : Json(nullptr)},
              {"method", to_string(r.method)},
              {"mode", to_string(r.mode)},
              {"T_BS", r.tbs},
              {"gamma_sector", r.gamma_sector},
              {"certificate", r.certificate ? certificate_to_json(*r.certificate) : Json(nullptr)},
              {"certificate_margin_rechecked", r.certificate_margin ? Json(*r.certificate_margin) : Json(nullptr)},
              {"loop", loop_to_json(r.loop)}};
    Json trace = Json::array();
    for (const auto& s : r.trace) trace.push_back({{"gain", s.gain}, {"verdict", to_string(s.verdict)}});
    j["bisection"] = std::move(trace);
    return j;
}

Json simulation_summary(const SimulationResult& r) {
    int events = 0;
    double worst_rel = 0.0;
    int worst_r = 0;
    for (const auto& b : r.bootstraps) {
        ++events;
        worst_rel = std::max(worst_rel, b.telemetry.relative_error);
        worst_r = std::max(worst_r, std::abs(b.telemetry.r));
    }
    return {{"empirical_gain", r.empirical_gain ? Json(*r.empirical_gain) : Json(nullptr)},
            {"z_energy", r.z_energy},
            {"w_energy", r.w_energy},
            {"assumption_violations", r.assumption_violations},
            {"bootstraps", events},
            {"max_bootstrap_relative_error", worst_rel},
            {"max_overflow_count", worst_r},
            {"max_ledger_ratio", r.max_ledger_ratio}};
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

void header(std::ofstream& out, const char* name, const std::vector<Vector>& v) {
    if (v.empty()) return;
    for (Eigen::Index i = 0; i < v[0].size(); ++i) out << ',' << name << i;
}

void row(std::ofstream& out, const std::vector<Vector>& v, std::size_t t) {
    if (v.empty()) return;
    for (Eigen::Index i = 0; i < v[t].size(); ++i) out << ',' << v[t][i];
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const SimulationResult& r) {
    auto out = open_csv(path);
    out << 't';
    header(out, "x", r.x);
    header(out, "xc", r.xc);
    header(out, "u", r.u);
    header(out, "y", r.y);
    header(out, "zp", r.zp);
    header(out, "wp", r.wp);
    out << '\n';
    for (std::size_t t = 0; t < r.x.size(); ++t) {
        out << t;
        row(out, r.x, t);
        row(out, r.xc, t);
        row(out, r.u, t);
        row(out, r.y, t);
        row(out, r.zp, t);
        row(out, r.wp, t);
        out << '\n';
    }
}

void write_telemetry_csv(const std::filesystem::path& path, const SimulationResult& r) {
    auto out = open_csv(path);
    out << "t,component,r,m_plus_e,poly_error,relative_error,status\n";
    for (const auto& b : r.bootstraps)
        out << b.t << ',' << b.component << ',' << b.telemetry.r << ',' << b.telemetry.m_plus_e << ','
            << b.telemetry.poly_error << ',' << b.telemetry.relative_error << ',' << toy::to_string(b.telemetry.status)
            << '\n';
}

void write_poly_csv(const std::filesystem::path& path, const BootstrapPolynomial& poly, std::size_t max_rows) {
    auto out = open_csv(path);
    out << "m,p_m,m_mod_q,relative_error\n";
    const auto pts = verification_points(poly.spec, 4096, 7);
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / std::max<std::size_t>(1, max_rows));
    for (std::size_t i = 0; i < pts.size(); i += stride) {
        const double v = pts[i];
        const double z = centered_mod(v, poly.spec.q);
        const double p = evaluate(poly, v);
        out << v << ',' << p << ',' << z << ',' << std::abs(p - z) / std::abs(z) << '\n';
    }
}

}  // namespace encctl::io
