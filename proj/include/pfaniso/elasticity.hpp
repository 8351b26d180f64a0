#pragma once

#include "pfaniso/kelvin.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pfaniso {

enum class SymmetryClass { isotropic, cubic, orthotropic, full };

inline std::string_view to_string(SymmetryClass c) {
    switch (c) {
        case SymmetryClass::isotropic: return "isotropic";
        case SymmetryClass::cubic: return "cubic";
        case SymmetryClass::orthotropic: return "orthotropic";
        case SymmetryClass::full: return "full";
    }
    return "unknown";
}

/// Thrown when elastic constants do not define a positive-definite operator.
class InadmissibleMaterial : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Classify the material symmetry visible in the current basis from the
/// structural zeros and equalities of the Kelvin matrix (tolerance relative to
/// the Frobenius norm).
inline SymmetryClass classify(const KelvinOperator& c, double rel_tol = 1e-8) {
    const Mat6& m = c.matrix();
    const double tol = rel_tol * m.norm();
    auto eq = [tol](double a, double b) { return std::abs(a - b) <= tol; };

    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const bool normal_shear = (i < 3) != (j < 3);
            const bool shear_off = i >= 3 && j >= 3 && i != j;
            if ((normal_shear || shear_off) && !eq(m(i, j), 0.0)) return SymmetryClass::full;
        }
    const bool cubic = eq(m(0, 0), m(1, 1)) && eq(m(0, 0), m(2, 2)) && eq(m(0, 1), m(0, 2)) &&
                       eq(m(0, 1), m(1, 2)) && eq(m(3, 3), m(4, 4)) && eq(m(3, 3), m(5, 5));
    if (!cubic) return SymmetryClass::orthotropic;
    // Isotropy: 2 C_2323 = C_1111 - C_1122.
    if (eq(m(3, 3), m(0, 0) - m(0, 1))) return SymmetryClass::isotropic;
    return SymmetryClass::cubic;
}

/// Validated linear elastic stiffness with cached operator roots.
///
/// Holds C, S = C^-1 and the square roots C^{1/2}, C^{-1/2}, S^{1/2},
/// S^{-1/2}. Immutable after construction. `symmetry` is the class of the
/// material in its principal axes; `orientation` is the accumulated rotation
/// angle about z applied through rotated().
class ElasticModel {
public:
    /// Validates and caches all operator functions of `stiffness`.
    static ElasticModel from_stiffness(const KelvinOperator& stiffness, SymmetryClass symmetry) {
        const Mat6& raw = stiffness.matrix();
        if (!raw.allFinite()) throw InadmissibleMaterial("elastic model: non-finite stiffness");
        ElasticModel m;
        m.c_ = stiffness;
        const Spectral4 sp = eig_sym4(m.c_);
        const double lmax = sp.values[0];
        if (!(lmax > 0.0) || !(sp.values[5] > kSpdTolerance * lmax))
            throw InadmissibleMaterial("elastic model: stiffness is not positive-definite");
        m.c_half_ = spectral_function(sp, [](double l) { return std::sqrt(l); });
        m.c_half_inv_ = spectral_function(sp, [](double l) { return 1.0 / std::sqrt(l); });
        m.s_ = spectral_function(sp, [](double l) { return 1.0 / l; });
        const Spectral4 ssp = eig_sym4(m.s_);
        m.s_half_ = spectral_function(ssp, [](double l) { return std::sqrt(l); });
        m.s_half_inv_ = spectral_function(ssp, [](double l) { return 1.0 / std::sqrt(l); });
        m.symmetry_ = symmetry;
        return m;
    }

    const KelvinOperator& C() const { return c_; }
    const KelvinOperator& S() const { return s_; }
    const KelvinOperator& C_half() const { return c_half_; }
    const KelvinOperator& C_half_inv() const { return c_half_inv_; }
    const KelvinOperator& S_half() const { return s_half_; }
    const KelvinOperator& S_half_inv() const { return s_half_inv_; }
    SymmetryClass symmetry() const { return symmetry_; }
    double orientation() const { return orientation_; }

    /// Elastic energy density 1/2 eps : C eps.
    double energy(const SymTensor2& eps) const { return 0.5 * dot(eps, c_ * eps); }

    /// Model expressed in a basis rotated about z by alpha. All cached
    /// operators are rotated with the same P (spectral functions commute with
    /// orthogonal changes of basis).
    ElasticModel rotated(double alpha) const {
        const KelvinOperator p = rotation_about_z(alpha);
        ElasticModel m;
        m.c_ = rotate_operator(c_, p);
        m.s_ = rotate_operator(s_, p);
        m.c_half_ = rotate_operator(c_half_, p);
        m.c_half_inv_ = rotate_operator(c_half_inv_, p);
        m.s_half_ = rotate_operator(s_half_, p);
        m.s_half_inv_ = rotate_operator(s_half_inv_, p);
        m.symmetry_ = symmetry_;
        m.orientation_ = orientation_ + alpha;
        return m;
    }

private:
    ElasticModel() = default;

    KelvinOperator c_, s_, c_half_, c_half_inv_, s_half_, s_half_inv_;
    SymmetryClass symmetry_ = SymmetryClass::full;
    double orientation_ = 0.0;
};

/// Convention used to read the Poisson ratio nu_ij of orthotropic constants.
enum class PoissonConvention {
    /// S_ij = -nu_ij / E_i: nu_ij is the contraction along j under load along i.
    row,
    /// S_ij = -nu_ij / E_j: nu_ij is the contraction along i under load along j.
    column,
};

struct OrthotropicConstants {
    std::array<double, 3> E;   // E1, E2, E3 [Pa]
    double nu23, nu13, nu12;   // dimensionless
    double G23, G13, G12;      // [Pa]
};

/// Orthotropic compliance in Kelvin form (shear diagonal 1/(2 G_ij)).
inline KelvinOperator orthotropic_compliance(const OrthotropicConstants& k,
                                             PoissonConvention conv = PoissonConvention::row) {
    for (double e : k.E)
        if (!(e > 0.0)) throw InadmissibleMaterial("orthotropic: Young's moduli must be positive");
    if (!(k.G23 > 0.0 && k.G13 > 0.0 && k.G12 > 0.0))
        throw InadmissibleMaterial("orthotropic: shear moduli must be positive");
    const auto& E = k.E;
    auto off = [&](double nu, int i, int j) {
        return conv == PoissonConvention::row ? -nu / E[static_cast<std::size_t>(i)]
                                              : -nu / E[static_cast<std::size_t>(j)];
    };
    Mat6 s = Mat6::Zero();
    s(0, 0) = 1.0 / E[0];
    s(1, 1) = 1.0 / E[1];
    s(2, 2) = 1.0 / E[2];
    s(0, 1) = s(1, 0) = off(k.nu12, 0, 1);
    s(0, 2) = s(2, 0) = off(k.nu13, 0, 2);
    s(1, 2) = s(2, 1) = off(k.nu23, 1, 2);
    s(3, 3) = 1.0 / (2.0 * k.G23);
    s(4, 4) = 1.0 / (2.0 * k.G13);
    s(5, 5) = 1.0 / (2.0 * k.G12);
    return KelvinOperator{s};
}

inline ElasticModel from_orthotropic(const OrthotropicConstants& k,
                                     PoissonConvention conv = PoissonConvention::row) {
    const KelvinOperator s = orthotropic_compliance(k, conv);
    const Spectral4 sp = eig_sym4(s);
    if (!(sp.values[5] > kSpdTolerance * sp.values[0]))
        throw InadmissibleMaterial("orthotropic: compliance is not positive-definite");
    // Block inverse keeps the structural zeros exact.
    Mat6 c = Mat6::Zero();
    c.topLeftCorner<3, 3>() = s.matrix().topLeftCorner<3, 3>().inverse();
    for (int i = 3; i < 6; ++i) c(i, i) = 1.0 / s(i, i);
    const KelvinOperator stiffness{c};
    return ElasticModel::from_stiffness(stiffness, classify(stiffness));
}

inline ElasticModel from_isotropic(double E, double nu) {
    if (!(E > 0.0) || !(nu > -1.0 && nu < 0.5))
        throw InadmissibleMaterial("isotropic: requires E > 0 and -1 < nu < 0.5");
    const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = E / (2.0 * (1.0 + nu));
    return ElasticModel::from_stiffness(isotropic_operator(lambda, mu), SymmetryClass::isotropic);
}

inline ElasticModel from_lame(double lambda, double mu) {
    return ElasticModel::from_stiffness(isotropic_operator(lambda, mu), SymmetryClass::isotropic);
}

/// Cubic-layout stiffness. The optional entries default to the cubic values
/// (C1133 = C2233 = C1122, C1313 = C1212 = C2323) and may be set to populate
/// the general layout with one C1111 on the diagonal.
struct CubicConstants {
    double C1111, C1122, C2323;
    std::optional<double> C1133, C2233, C1313, C1212;
};

inline ElasticModel from_cubic(const CubicConstants& k) {
    const double c13 = k.C1133.value_or(k.C1122);
    const double c23 = k.C2233.value_or(k.C1122);
    const double g13 = k.C1313.value_or(k.C2323);
    const double g12 = k.C1212.value_or(k.C2323);
    Mat6 m = Mat6::Zero();
    m(0, 0) = m(1, 1) = m(2, 2) = k.C1111;
    m(0, 1) = m(1, 0) = k.C1122;
    m(0, 2) = m(2, 0) = c13;
    m(1, 2) = m(2, 1) = c23;
    m(3, 3) = 2.0 * k.C2323;
    m(4, 4) = 2.0 * g13;
    m(5, 5) = 2.0 * g12;
    const KelvinOperator c{m};
    return ElasticModel::from_stiffness(c, classify(c));
}

/// Fully anisotropic stiffness from the 21 upper-triangle Kelvin entries,
/// row by row: (0,0) (0,1) ... (0,5) (1,1) ... (5,5).
inline ElasticModel from_full(const std::array<double, 21>& upper) {
    Mat6 m;
    std::size_t k = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) m(i, j) = m(j, i) = upper[k++];
    const KelvinOperator c{m};
    return ElasticModel::from_stiffness(c, classify(c));
}

inline std::array<double, 21> upper_entries(const KelvinOperator& c) {
    std::array<double, 21> out{};
    std::size_t k = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) out[k++] = c(i, j);
    return out;
}

/// Orthotropic constants of the benchmark material [Pa].
inline OrthotropicConstants benchmark_orthotropic_constants() {
    constexpr double GPa = 1e9;
    return OrthotropicConstants{{210 * GPa, 70 * GPa, 210 * GPa}, 0.17, 0.3, 0.52,
                                46.63 * GPa, 80.77 * GPa, 46.63 * GPa};
}

}  // namespace pfaniso
