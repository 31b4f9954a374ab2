#ifndef QLW_NULLFORM_HPP
#define QLW_NULLFORM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qlw {

/** Wave speeds 0 < c_1 < c_2 < ... < c_m. Component indices are 1-based
 *  throughout the library, matching the coefficient file format; derivative
 *  indices run 0..2 with 0 = time. */
class SpeedVector {
public:
    explicit SpeedVector(std::vector<double> speeds);

    int m() const { return static_cast<int>(c_.size()); }
    double c(int i) const;                      // 1-based
    double c_max() const { return c_.back(); }
    double c_min() const { return c_.front(); }

    /** Separation constant: min gap between consecutive speeds (c_0 = 0
     *  convention) divided by 3. Cone slabs of this half-width are disjoint. */
    double c_star() const;

    const std::vector<double>& values() const { return c_; }

private:
    std::vector<double> c_;
};

/** The four homogeneous forms built from the diagonal coefficient slots:
 *  Phi   cubic     from the quasilinear quadratic tensor a
 *  Psi   quadratic from the semilinear quadratic tensor b
 *  Theta quartic   from the quasilinear cubic tensor c
 *  Xi    cubic     from the semilinear cubic tensor d */
enum class FormKind : std::uint8_t { Phi, Psi, Theta, Xi };

const char* form_name(FormKind kind);
int form_degree(FormKind kind);

enum class NullMode : std::uint8_t { Strong, Standard };

/** Nonlinearity tensors of an m-component system. Entries default to zero;
 *  only set values are stored in the file format. Component indices 1..m,
 *  derivative indices 0..2.
 *    a  (i,l,j,alpha,beta,gamma)        quasilinear quadratic
 *    b  (i,j,k,alpha,beta)              semilinear quadratic
 *    c  (i,l,j,k,alpha,beta,gamma,delta) quasilinear cubic
 *    d  (i,j,k,l,alpha,beta,gamma)      semilinear cubic
 *  Higher-order remainders are not representable. */
class CoefficientSet {
public:
    explicit CoefficientSet(int m);

    int m() const { return m_; }

    double a(int i, int l, int j, int al, int be, int ga) const;
    double b(int i, int j, int k, int al, int be) const;
    double c(int i, int l, int j, int k, int al, int be, int ga, int de) const;
    double d(int i, int j, int k, int l, int al, int be, int ga) const;

    void set_a(int i, int l, int j, int al, int be, int ga, double v);
    void set_b(int i, int j, int k, int al, int be, double v);
    void set_c(int i, int l, int j, int k, int al, int be, int ga, int de, double v);
    void set_d(int i, int j, int k, int l, int al, int be, int ga, double v);

    bool empty() const;
    double max_abs(FormKind kind) const;        // over the tensor backing the form
    double max_abs() const;                     // over all four tensors

    /** Coefficient of the second-order derivative terms as a polynomial in
     *  the gradient vector v (indexed v[(j-1)*3 + gamma]). */
    double A(int i, int l, int al, int be, const std::vector<double>& v) const;

    const std::vector<double>& raw_a() const { return a_; }
    const std::vector<double>& raw_b() const { return b_; }
    const std::vector<double>& raw_c() const { return c_; }
    const std::vector<double>& raw_d() const { return d_; }

private:
    void check_comp(int i) const;
    static void check_greek(int g);

    int m_;
    std::vector<double> a_, b_, c_, d_;
};

/** Reads tensors from a JSON file: an array of records
 *  {"tensor": "a"|"b"|"c"|"d", "indices": [...], "value": x}.
 *  Unknown tensor names and wrong index counts are errors. */
CoefficientSet load_coefficients(const std::string& path, int m);
CoefficientSet parse_coefficients(const std::string& json_text, int m);
void save_coefficients(const CoefficientSet& coeffs, const std::string& path);

/** Form value at X = (X0, X1, X2). */
double eval_form(FormKind kind, const CoefficientSet& coeffs, int i, int l,
                 const std::array<double, 3>& X);

/** A point on a characteristic cone where a form fails to vanish. */
struct NullWitness {
    int i = 0;
    int l = 0;
    double theta = 0.0;   // angle on the cone circle
    int sign = +1;        // sign of X0 = sign * c_l
    double value = 0.0;   // form value there
};

struct NullReport {
    FormKind form = FormKind::Psi;
    NullMode mode = NullMode::Strong;
    bool holds = false;
    std::vector<NullWitness> witnesses;   // empty iff holds
};

/** Decides whether the form vanishes on every characteristic cone
 *  X0^2 = c_l^2 (X1^2 + X2^2). Homogeneity reduces the cone to the circle
 *  pair X = (sigma c_l, cos t, sin t); the restriction is a trigonometric
 *  polynomial of degree <= 4, so sampling at 2 deg + 1 equispaced angles and
 *  taking discrete Fourier coefficients decides vanishing exactly. A
 *  coefficient counts as zero when its magnitude is below
 *  1e-12 * (max |tensor entry| + 1).
 *  Strong mode quantifies over all pairs (i, l); standard mode over l = i. */
NullReport check_null(const CoefficientSet& coeffs, const SpeedVector& speeds,
                      FormKind kind, NullMode mode);

/** True iff A_l^{i,ab} == A_i^{l,ab} == A_i^{l,ba} as polynomials in the
 *  gradient, i.e. entry-wise on a and on the (j,gamma)<->(k,delta)
 *  symmetrization of c, within the tolerance. */
bool check_symmetry(const CoefficientSet& coeffs, double tolerance = 0.0);

/** True iff a_{lj}^{i,...} = 0 whenever (j,l) != (i,i) and
 *  b_{jk}^{i,...} = 0 whenever j != k. */
bool check_structure(const CoefficientSet& coeffs);

/** Estimates sup |A_l^{i,ab}(v)| over |v| <= gradient_bound by scanning
 *  sampled directions (exact along each ray since A is quadratic in v) and
 *  compares against (min{1, c_1})^2 / (2m). Sampling-based, conservative,
 *  not a certified bound. */
bool check_smallness(const CoefficientSet& coeffs, const SpeedVector& speeds,
                     double gradient_bound, int n_directions = 262144);

} // namespace qlw

#endif
