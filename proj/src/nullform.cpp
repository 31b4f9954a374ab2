#include "qlw/nullform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qlw/errors.hpp"

namespace qlw {

// ---------------------------------------------------------------------------
// SpeedVector

SpeedVector::SpeedVector(std::vector<double> speeds) : c_(std::move(speeds)) {
    if (c_.empty()) throw DomainError("speeds: need at least one component");
    double prev = 0.0;
    for (std::size_t k = 0; k < c_.size(); ++k) {
        if (!(c_[k] > prev))
            throw DomainError("speeds: must be strictly increasing and positive "
                              "(0 < c_1 < ... < c_m)");
        prev = c_[k];
    }
}

double SpeedVector::c(int i) const {
    if (i < 1 || i > m()) throw DomainError("speed index out of range");
    return c_[i - 1];
}

double SpeedVector::c_star() const {
    double gap = c_[0]; // c_0 = 0 convention
    for (std::size_t k = 1; k < c_.size(); ++k) gap = std::min(gap, c_[k] - c_[k - 1]);
    return gap / 3.0;
}

// ---------------------------------------------------------------------------
// CoefficientSet

CoefficientSet::CoefficientSet(int m) : m_(m) {
    if (m < 1) throw DomainError("coefficients: need m >= 1");
    const std::size_t mm = static_cast<std::size_t>(m);
    a_.assign(mm * mm * mm * 27, 0.0);
    b_.assign(mm * mm * mm * 9, 0.0);
    c_.assign(mm * mm * mm * mm * 81, 0.0);
    d_.assign(mm * mm * mm * mm * 27, 0.0);
}

void CoefficientSet::check_comp(int i) const {
    if (i < 1 || i > m_) throw DomainError("component index out of range 1..m");
}

void CoefficientSet::check_greek(int g) {
    if (g < 0 || g > 2) throw DomainError("derivative index out of range 0..2");
}

// Flat layouts: components first (0-based), then derivative indices.
static std::size_t idx_a(int m, int i, int l, int j, int al, int be, int ga) {
    return ((((static_cast<std::size_t>(i - 1) * m + (l - 1)) * m + (j - 1)) * 3 + al) * 3 + be) * 3 + ga;
}
static std::size_t idx_b(int m, int i, int j, int k, int al, int be) {
    return (((static_cast<std::size_t>(i - 1) * m + (j - 1)) * m + (k - 1)) * 3 + al) * 3 + be;
}
static std::size_t idx_c(int m, int i, int l, int j, int k, int al, int be, int ga, int de) {
    return ((((((static_cast<std::size_t>(i - 1) * m + (l - 1)) * m + (j - 1)) * m + (k - 1)) * 3 + al) * 3 + be) * 3 + ga) * 3 + de;
}
static std::size_t idx_d(int m, int i, int j, int k, int l, int al, int be, int ga) {
    return (((((static_cast<std::size_t>(i - 1) * m + (j - 1)) * m + (k - 1)) * m + (l - 1)) * 3 + al) * 3 + be) * 3 + ga;
}

double CoefficientSet::a(int i, int l, int j, int al, int be, int ga) const {
    check_comp(i); check_comp(l); check_comp(j);
    check_greek(al); check_greek(be); check_greek(ga);
    return a_[idx_a(m_, i, l, j, al, be, ga)];
}
double CoefficientSet::b(int i, int j, int k, int al, int be) const {
    check_comp(i); check_comp(j); check_comp(k);
    check_greek(al); check_greek(be);
    return b_[idx_b(m_, i, j, k, al, be)];
}
double CoefficientSet::c(int i, int l, int j, int k, int al, int be, int ga, int de) const {
    check_comp(i); check_comp(l); check_comp(j); check_comp(k);
    check_greek(al); check_greek(be); check_greek(ga); check_greek(de);
    return c_[idx_c(m_, i, l, j, k, al, be, ga, de)];
}
double CoefficientSet::d(int i, int j, int k, int l, int al, int be, int ga) const {
    check_comp(i); check_comp(j); check_comp(k); check_comp(l);
    check_greek(al); check_greek(be); check_greek(ga);
    return d_[idx_d(m_, i, j, k, l, al, be, ga)];
}

void CoefficientSet::set_a(int i, int l, int j, int al, int be, int ga, double v) {
    check_comp(i); check_comp(l); check_comp(j);
    check_greek(al); check_greek(be); check_greek(ga);
    a_[idx_a(m_, i, l, j, al, be, ga)] = v;
}
void CoefficientSet::set_b(int i, int j, int k, int al, int be, double v) {
    check_comp(i); check_comp(j); check_comp(k);
    check_greek(al); check_greek(be);
    b_[idx_b(m_, i, j, k, al, be)] = v;
}
void CoefficientSet::set_c(int i, int l, int j, int k, int al, int be, int ga, int de, double v) {
    check_comp(i); check_comp(l); check_comp(j); check_comp(k);
    check_greek(al); check_greek(be); check_greek(ga); check_greek(de);
    c_[idx_c(m_, i, l, j, k, al, be, ga, de)] = v;
}
void CoefficientSet::set_d(int i, int j, int k, int l, int al, int be, int ga, double v) {
    check_comp(i); check_comp(j); check_comp(k); check_comp(l);
    check_greek(al); check_greek(be); check_greek(ga);
    d_[idx_d(m_, i, j, k, l, al, be, ga)] = v;
}

static double vec_max_abs(const std::vector<double>& v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
}

bool CoefficientSet::empty() const { return max_abs() == 0.0; }

double CoefficientSet::max_abs(FormKind kind) const {
    switch (kind) {
        case FormKind::Phi: return vec_max_abs(a_);
        case FormKind::Psi: return vec_max_abs(b_);
        case FormKind::Theta: return vec_max_abs(c_);
        case FormKind::Xi: return vec_max_abs(d_);
    }
    return 0.0;
}

double CoefficientSet::max_abs() const {
    return std::max(std::max(vec_max_abs(a_), vec_max_abs(b_)),
                    std::max(vec_max_abs(c_), vec_max_abs(d_)));
}

double CoefficientSet::A(int i, int l, int al, int be, const std::vector<double>& v) const {
    check_comp(i); check_comp(l);
    check_greek(al); check_greek(be);
    if (v.size() != static_cast<std::size_t>(3 * m_))
        throw DomainError("A: gradient vector must have 3m entries");
    double acc = 0.0;
    for (int j = 1; j <= m_; ++j)
        for (int ga = 0; ga < 3; ++ga)
            acc += a_[idx_a(m_, i, l, j, al, be, ga)] * v[(j - 1) * 3 + ga];
    for (int j = 1; j <= m_; ++j)
        for (int k = 1; k <= m_; ++k)
            for (int ga = 0; ga < 3; ++ga)
                for (int de = 0; de < 3; ++de)
                    acc += c_[idx_c(m_, i, l, j, k, al, be, ga, de)] *
                           v[(j - 1) * 3 + ga] * v[(k - 1) * 3 + de];
    return acc;
}

// ---------------------------------------------------------------------------
// File format

const char* form_name(FormKind kind) {
    switch (kind) {
        case FormKind::Phi: return "Phi";
        case FormKind::Psi: return "Psi";
        case FormKind::Theta: return "Theta";
        case FormKind::Xi: return "Xi";
    }
    return "?";
}

int form_degree(FormKind kind) {
    switch (kind) {
        case FormKind::Phi: return 3;
        case FormKind::Psi: return 2;
        case FormKind::Theta: return 4;
        case FormKind::Xi: return 3;
    }
    return 0;
}

CoefficientSet parse_coefficients(const std::string& json_text, int m) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw DomainError(std::string("coefficient file: malformed JSON: ") + e.what());
    }
    if (!doc.is_array()) throw DomainError("coefficient file: expected a JSON array of records");
    CoefficientSet coeffs(m);
    for (const auto& rec : doc) {
        if (!rec.is_object() || !rec.contains("tensor") || !rec.contains("indices") ||
            !rec.contains("value"))
            throw DomainError("coefficient record: need tensor, indices, value");
        const std::string tensor = rec.at("tensor").get<std::string>();
        const auto idx = rec.at("indices").get<std::vector<int>>();
        const double value = rec.at("value").get<double>();
        auto need = [&](std::size_t n) {
            if (idx.size() != n) {
                std::ostringstream os;
                os << "tensor \"" << tensor << "\": expected " << n << " indices, got "
                   << idx.size();
                throw DomainError(os.str());
            }
        };
        if (tensor == "a") {
            need(6);
            coeffs.set_a(idx[0], idx[1], idx[2], idx[3], idx[4], idx[5], value);
        } else if (tensor == "b") {
            need(5);
            coeffs.set_b(idx[0], idx[1], idx[2], idx[3], idx[4], value);
        } else if (tensor == "c") {
            need(8);
            coeffs.set_c(idx[0], idx[1], idx[2], idx[3], idx[4], idx[5], idx[6], idx[7], value);
        } else if (tensor == "d") {
            need(7);
            coeffs.set_d(idx[0], idx[1], idx[2], idx[3], idx[4], idx[5], idx[6], value);
        } else {
            throw DomainError("coefficient record: unknown tensor \"" + tensor +
                              "\" (expected a, b, c or d)");
        }
    }
    return coeffs;
}

CoefficientSet load_coefficients(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw DomainError("coefficient file not readable: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_coefficients(buf.str(), m);
}

void save_coefficients(const CoefficientSet& coeffs, const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    const int m = coeffs.m();
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int j = 1; j <= m; ++j)
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        for (int ga = 0; ga < 3; ++ga)
                            if (double v = coeffs.a(i, l, j, al, be, ga); v != 0.0)
                                doc.push_back({{"tensor", "a"},
                                               {"indices", {i, l, j, al, be, ga}},
                                               {"value", v}});
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        if (double v = coeffs.b(i, j, k, al, be); v != 0.0)
                            doc.push_back({{"tensor", "b"},
                                           {"indices", {i, j, k, al, be}},
                                           {"value", v}});
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int j = 1; j <= m; ++j)
                for (int k = 1; k <= m; ++k)
                    for (int al = 0; al < 3; ++al)
                        for (int be = 0; be < 3; ++be)
                            for (int ga = 0; ga < 3; ++ga)
                                for (int de = 0; de < 3; ++de)
                                    if (double v = coeffs.c(i, l, j, k, al, be, ga, de); v != 0.0)
                                        doc.push_back({{"tensor", "c"},
                                                       {"indices", {i, l, j, k, al, be, ga, de}},
                                                       {"value", v}});
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                for (int l = 1; l <= m; ++l)
                    for (int al = 0; al < 3; ++al)
                        for (int be = 0; be < 3; ++be)
                            for (int ga = 0; ga < 3; ++ga)
                                if (double v = coeffs.d(i, j, k, l, al, be, ga); v != 0.0)
                                    doc.push_back({{"tensor", "d"},
                                                   {"indices", {i, j, k, l, al, be, ga}},
                                                   {"value", v}});
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write coefficient file: " + path);
    out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Forms

double eval_form(FormKind kind, const CoefficientSet& coeffs, int i, int l,
                 const std::array<double, 3>& X) {
    for (double x : X)
        if (!std::isfinite(x)) throw DomainError("eval_form: non-finite X");
    double acc = 0.0;
    switch (kind) {
        case FormKind::Phi:
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    for (int ga = 0; ga < 3; ++ga)
                        acc += coeffs.a(i, l, l, al, be, ga) * X[al] * X[be] * X[ga];
            break;
        case FormKind::Psi:
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    acc += coeffs.b(i, l, l, al, be) * X[al] * X[be];
            break;
        case FormKind::Theta:
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    for (int ga = 0; ga < 3; ++ga)
                        for (int de = 0; de < 3; ++de)
                            acc += coeffs.c(i, l, l, l, al, be, ga, de) *
                                   X[al] * X[be] * X[ga] * X[de];
            break;
        case FormKind::Xi:
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    for (int ga = 0; ga < 3; ++ga)
                        acc += coeffs.d(i, l, l, l, al, be, ga) * X[al] * X[be] * X[ga];
            break;
    }
    return acc;
}

NullReport check_null(const CoefficientSet& coeffs, const SpeedVector& speeds,
                      FormKind kind, NullMode mode) {
    if (coeffs.m() != speeds.m())
        throw DomainError("check_null: coefficients and speeds disagree on m");
    const int m = speeds.m();
    const int deg = form_degree(kind);
    const int n = 2 * deg + 1;
    const double zero_tol = 1e-12 * (coeffs.max_abs(kind) + 1.0);

    NullReport report;
    report.form = kind;
    report.mode = mode;

    for (int i = 1; i <= m; ++i) {
        for (int l = 1; l <= m; ++l) {
            if (mode == NullMode::Standard && l != i) continue;
            const double cl = speeds.c(l);
            for (int sign : {+1, -1}) {
                // Restriction to the circle X = (sign*c_l, cos t, sin t):
                // a trig polynomial of degree <= deg, decided through its DFT.
                std::vector<double> samples(n);
                double worst = 0.0, worst_theta = 0.0;
                for (int s = 0; s < n; ++s) {
                    const double theta = 2.0 * M_PI * s / n;
                    samples[s] = eval_form(kind, coeffs, i, l,
                                           {sign * cl, std::cos(theta), std::sin(theta)});
                    if (std::abs(samples[s]) > std::abs(worst)) {
                        worst = samples[s];
                        worst_theta = theta;
                    }
                }
                bool vanishes = true;
                for (int freq = 0; freq <= deg && vanishes; ++freq) {
                    std::complex<double> hat(0.0, 0.0);
                    for (int s = 0; s < n; ++s) {
                        const double phase = -2.0 * M_PI * freq * s / n;
                        hat += samples[s] * std::complex<double>(std::cos(phase), std::sin(phase));
                    }
                    if (std::abs(hat) / n > zero_tol) vanishes = false;
                }
                if (!vanishes)
                    report.witnesses.push_back({i, l, worst_theta, sign, worst});
            }
        }
    }
    report.holds = report.witnesses.empty();
    return report;
}

bool check_symmetry(const CoefficientSet& coeffs, double tolerance) {
    const int m = coeffs.m();
    // Linear-in-gradient part: direct entry comparison.
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    for (int j = 1; j <= m; ++j)
                        for (int ga = 0; ga < 3; ++ga) {
                            const double x = coeffs.a(i, l, j, al, be, ga);
                            if (std::abs(x - coeffs.a(l, i, j, al, be, ga)) > tolerance) return false;
                            if (std::abs(x - coeffs.a(l, i, j, be, al, ga)) > tolerance) return false;
                        }
    // Quadratic-in-gradient part: compare after symmetrizing over the two
    // gradient slots, since v_ga^j v_de^k = v_de^k v_ga^j.
    auto sym_c = [&](int i, int l, int j, int k, int al, int be, int ga, int de) {
        return coeffs.c(i, l, j, k, al, be, ga, de) + coeffs.c(i, l, k, j, al, be, de, ga);
    };
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be)
                    for (int j = 1; j <= m; ++j)
                        for (int k = 1; k <= m; ++k)
                            for (int ga = 0; ga < 3; ++ga)
                                for (int de = 0; de < 3; ++de) {
                                    const double x = sym_c(i, l, j, k, al, be, ga, de);
                                    if (std::abs(x - sym_c(l, i, j, k, al, be, ga, de)) > tolerance)
                                        return false;
                                    if (std::abs(x - sym_c(l, i, j, k, be, al, ga, de)) > tolerance)
                                        return false;
                                }
    return true;
}

bool check_structure(const CoefficientSet& coeffs) {
    const int m = coeffs.m();
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int j = 1; j <= m; ++j) {
                if (j == i && l == i) continue;
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        for (int ga = 0; ga < 3; ++ga)
                            if (coeffs.a(i, l, j, al, be, ga) != 0.0) return false;
            }
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k) {
                if (j == k) continue;
                for (int al = 0; al < 3; ++al)
                    for (int be = 0; be < 3; ++be)
                        if (coeffs.b(i, j, k, al, be) != 0.0) return false;
            }
    return true;
}

bool check_smallness(const CoefficientSet& coeffs, const SpeedVector& speeds,
                     double gradient_bound, int n_directions) {
    if (gradient_bound < 0.0) throw DomainError("check_smallness: gradient_bound >= 0");
    const int m = coeffs.m();
    const double limit = std::pow(std::min(1.0, speeds.c(1)), 2) / (2.0 * m);
    const int dim = 3 * m;

    // Slots (i,l,al,be) whose linear and quadratic parts are all zero never
    // contribute; with empty tensors the scan is free.
    struct Slot { int i, l, al, be; };
    std::vector<Slot> active;
    for (int i = 1; i <= m; ++i)
        for (int l = 1; l <= m; ++l)
            for (int al = 0; al < 3; ++al)
                for (int be = 0; be < 3; ++be) {
                    bool any = false;
                    for (int j = 1; j <= m && !any; ++j)
                        for (int ga = 0; ga < 3 && !any; ++ga)
                            any = coeffs.a(i, l, j, al, be, ga) != 0.0;
                    for (int j = 1; j <= m && !any; ++j)
                        for (int k = 1; k <= m && !any; ++k)
                            for (int ga = 0; ga < 3 && !any; ++ga)
                                for (int de = 0; de < 3 && !any; ++de)
                                    any = coeffs.c(i, l, j, k, al, be, ga, de) != 0.0;
                    if (any) active.push_back({i, l, al, be});
                }
    if (active.empty()) return true;

    // Along each sampled ray v = t*dir, A is linear + quadratic in t, so the
    // maximum of |A| over t in [-R, R] can be taken exactly; only the
    // direction set is sampled.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(dim), vlin(dim);

    double sup = 0.0;
    const double R = gradient_bound;
    for (int sample = 0; sample < n_directions; ++sample) {
        if (sample < dim) {
            std::fill(dir.begin(), dir.end(), 0.0);
            dir[sample] = 1.0; // axis directions always included
        } else {
            double norm = 0.0;
            for (int q = 0; q < dim; ++q) {
                dir[q] = gauss(rng);
                norm += dir[q] * dir[q];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (int q = 0; q < dim; ++q) dir[q] /= norm;
        }
        for (const Slot& slot : active) {
            double lin = 0.0, quad = 0.0;
            for (int j = 1; j <= m; ++j)
                for (int ga = 0; ga < 3; ++ga)
                    lin += coeffs.a(slot.i, slot.l, j, slot.al, slot.be, ga) *
                           dir[(j - 1) * 3 + ga];
            for (int j = 1; j <= m; ++j)
                for (int k = 1; k <= m; ++k)
                    for (int ga = 0; ga < 3; ++ga)
                        for (int de = 0; de < 3; ++de)
                            quad += coeffs.c(slot.i, slot.l, j, k, slot.al, slot.be, ga, de) *
                                    dir[(j - 1) * 3 + ga] * dir[(k - 1) * 3 + de];
            // max over t in [-R, R] of |lin*t + quad*t^2|
            double best = std::max(std::abs(lin * R + quad * R * R),
                                   std::abs(-lin * R + quad * R * R));
            if (quad != 0.0) {
                const double tstar = -lin / (2.0 * quad);
                if (std::abs(tstar) <= R)
                    best = std::max(best, std::abs(lin * tstar + quad * tstar * tstar));
            }
            sup = std::max(sup, best);
        }
        if (sup >= limit) return false;
    }
    return sup < limit;
}

} // namespace qlw
