#pragma once

// Seeded property suites over the split laws, exposed by `pfaniso verify`.

#include "pfaniso/elasticity.hpp"
#include "pfaniso/split.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace pfaniso {

// ---------------------------------------------------------------------------
// Random inputs

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Random admissible stiffness of the requested class [Pa].
inline ElasticModel random_model(SymmetryClass cls, Rng& rng) {
    constexpr double GPa = 1e9;
    switch (cls) {
        case SymmetryClass::isotropic:
            return from_isotropic(uniform(rng, 10.0, 400.0) * GPa, uniform(rng, -0.3, 0.45));
        case SymmetryClass::cubic: {
            const double c11 = uniform(rng, 100.0, 300.0) * GPa;
            CubicConstants k{};
            k.C1111 = c11;
            k.C1122 = uniform(rng, -0.45, 0.9) * c11;
            k.C2323 = uniform(rng, 20.0, 150.0) * GPa;
            return from_cubic(k);
        }
        case SymmetryClass::orthotropic:
            return from_orthotropic(benchmark_orthotropic_constants()).rotated(uniform(rng, -std::numbers::pi, std::numbers::pi));
        case SymmetryClass::full: {
            // Q diag(lambda) Q^T with a Haar-ish orthogonal Q and log-uniform spectrum.
            std::normal_distribution<double> n01;
            Mat6 g;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) g(i, j) = n01(rng);
            const Eigen::HouseholderQR<Mat6> qr(g);
            const Mat6 q = qr.householderQ();
            Vec6 lambda;
            for (int i = 0; i < 6; ++i) lambda[i] = std::exp(uniform(rng, std::log(10.0), std::log(400.0))) * GPa;
            const Mat6 c = q * lambda.asDiagonal() * q.transpose();
            return ElasticModel::from_stiffness(KelvinOperator{Mat6(0.5 * (c + c.transpose()))}, SymmetryClass::full);
        }
    }
    throw std::invalid_argument("random_model: unknown class");
}

/// Random 3D strain with components of order 1e-3.
inline SymTensor2 random_strain(Rng& rng) {
    std::normal_distribution<double> n01;
    Vec6 v;
    for (int i = 0; i < 6; ++i) v[i] = 1e-3 * n01(rng);
    return SymTensor2{v};
}

inline constexpr SymmetryClass kAllClasses[] = {SymmetryClass::isotropic, SymmetryClass::cubic,
                                                SymmetryClass::orthotropic, SymmetryClass::full};
inline constexpr SplitLaw kCrackLaws[] = {SplitLaw::vol_dev, SplitLaw::no_tension};

// ---------------------------------------------------------------------------
// Reports

struct CheckResult {
    std::string name;
    long cases = 0;
    long failed = 0;
    long skipped = 0;
    double max_error = 0.0;   ///< worst normalized error
    double tolerance = 0.0;

    void record(double err) {
        ++cases;
        if (!(err <= tolerance)) ++failed;   // NaN fails
        if (std::isnan(err) || err > max_error) max_error = err;
    }
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::deque<CheckResult> checks;   // stable references for check()
    double seconds = 0.0;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.failed == 0 && c.cases > 0; });
    }

    CheckResult& check(const std::string& name, double tol) {
        for (auto& c : checks)
            if (c.name == name) return c;
        checks.push_back({name, 0, 0, 0, 0.0, tol});
        return checks.back();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["suite"] = suite;
        j["seed"] = seed;
        j["passed"] = passed();
        j["seconds"] = seconds;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks)
            j["checks"].push_back({{"name", c.name},
                                   {"cases", c.cases},
                                   {"failed", c.failed},
                                   {"skipped", c.skipped},
                                   {"max_error", c.max_error},
                                   {"tolerance", c.tolerance}});
        return j;
    }
};

class UnknownSuite : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Suites

namespace detail {

inline std::string class_law_name(const char* what, SymmetryClass c, SplitLaw l) {
    return std::string(what) + "/" + std::string(to_string(c)) + "/" + std::string(to_string(l));
}

/// C^t eps^t . eps^c and S sigma^t . sigma^c vanish.
inline void suite_orthogonality(SuiteReport& r, Rng& rng, int n) {
    for (SymmetryClass cls : kAllClasses)
        for (SplitLaw law : kCrackLaws) {
            auto& strain = r.check(class_law_name("strain", cls, law), 1e-10);
            auto& stress = r.check(class_law_name("stress", cls, law), 1e-10);
            for (int i = 0; i < n; ++i) {
                const ElasticModel m = random_model(cls, rng);
                const SymTensor2 eps = random_strain(rng);
                const SplitState s = split(law, m, eps);
                const SymTensor2 sigma = m.C() * eps;
                strain.record(std::abs(dot(m.C() * s.eps_t, s.eps_c)) / (m.C().norm() * eps.norm() * eps.norm()));
                stress.record(std::abs(dot(m.S() * s.sigma_t, s.sigma_c)) / (m.S().norm() * sigma.norm() * sigma.norm()));
            }
        }
}

/// psi^t + psi^c equals the full energy; the strain and stiffness parts add up.
inline void suite_partition(SuiteReport& r, Rng& rng, int n) {
    for (SymmetryClass cls : kAllClasses)
        for (SplitLaw law : kCrackLaws) {
            auto& energy = r.check(class_law_name("energy", cls, law), 1e-10);
            auto& strain = r.check(class_law_name("strain-sum", cls, law), 1e-12);
            for (int i = 0; i < n; ++i) {
                const ElasticModel m = random_model(cls, rng);
                const SymTensor2 eps = random_strain(rng);
                const SplitState s = split(law, m, eps);
                const double psi = m.energy(eps);
                energy.record(std::abs(s.psi_t + s.psi_c - psi) / psi);
                strain.record((s.eps_t + s.eps_c - eps).norm() / eps.norm());
            }
        }
}

/// (C^{1/2})^2 = C and (S^{1/2})^2 = S.
inline void suite_sqrt(SuiteReport& r, Rng& rng, int n) {
    auto& c_check = r.check("stiffness", 1e-10);
    auto& s_check = r.check("compliance", 1e-10);
    auto& inv_check = r.check("inverse-root", 1e-10);
    auto one = [&](const ElasticModel& m) {
        c_check.record((m.C_half().matrix() * m.C_half().matrix() - m.C().matrix()).norm() / m.C().norm());
        s_check.record((m.S_half().matrix() * m.S_half().matrix() - m.S().matrix()).norm() / m.S().norm());
        inv_check.record((m.C_half_inv().matrix() * m.C_half().matrix() - Mat6::Identity()).norm());
    };
    one(from_orthotropic(benchmark_orthotropic_constants()));
    one(from_orthotropic(benchmark_orthotropic_constants(), PoissonConvention::column));
    for (SymmetryClass cls : kAllClasses)
        for (int i = 0; i < n; ++i) one(random_model(cls, rng));
}

/// Printed shear slot order (12, 13, 23) mapped to ours (23, 13, 12).
inline Mat6 from_printed_order(const Mat6& printed) {
    Mat6 p = Mat6::Identity();
    p(3, 3) = p(5, 5) = 0.0;
    p(3, 5) = p(5, 3) = 1.0;
    return p * printed * p;
}

struct ClosedFormCase {
    const char* name;
    Vec3 eig;           ///< transformed principal strains, descending
    Mat6 D_t, D_c;      ///< printed order
};

inline std::vector<ClosedFormCase> closed_form_cases() {
    std::vector<ClosedFormCase> out;
    auto diag = [](std::initializer_list<double> v) {
        Vec6 d;
        int i = 0;
        for (double x : v) d[i++] = x;
        return Mat6(d.asDiagonal());
    };
    {
        const Vec3 e(3e-3, 2e-3, 1e-3);
        out.push_back({"case I", e, Mat6::Identity(), Mat6::Zero()});
    }
    {
        const Vec3 e(2e-3, 1e-3, -1e-3);
        const double e1 = e[0], e2 = e[1], e3 = e[2];
        out.push_back({"case II", e, diag({1, 1, 0, 1, e1 / (e1 - e3), e2 / (e2 - e3)}),
                       diag({0, 0, 1, 0, -e3 / (e1 - e3), -e3 / (e2 - e3)})});
    }
    {
        const Vec3 e(1e-3, -1e-3, -2e-3);
        const double e1 = e[0], e2 = e[1], e3 = e[2];
        out.push_back({"case III", e, diag({1, 0, 0, e1 / (e1 - e2), e1 / (e1 - e3), 0}),
                       diag({0, 1, 1, -e2 / (e1 - e2), -e3 / (e1 - e3), 1})});
    }
    {
        const Vec3 e(-1e-3, -2e-3, -3e-3);
        out.push_back({"case IV", e, Mat6::Zero(), Mat6::Identity()});
    }
    return out;
}

/// The no-tension projection tensors of strains whose transformed principal
/// axes are the coordinate axes reproduce the closed-form case tables.
inline void suite_appendix(SuiteReport& r) {
    const ElasticModel m = from_orthotropic(benchmark_orthotropic_constants());
    for (const auto& c : closed_form_cases()) {
        auto& check = r.check(c.name, 1e-12);
        const SymTensor2 eps_tilde{c.eig[0], c.eig[1], c.eig[2], 0.0, 0.0, 0.0};
        const SplitState s = split(SplitLaw::no_tension, m, m.C_half_inv() * eps_tilde);
        check.record((s.D_t.matrix() - from_printed_order(c.D_t)).cwiseAbs().maxCoeff());
        check.record((s.D_c.matrix() - from_printed_order(c.D_c)).cwiseAbs().maxCoeff());
    }
}

/// Projected gradient on 1/2 |C^{1/2} eps - y|^2 over the cone, with the cone
/// projection done by a plain dense eigensolver.
inline SymTensor2 projected_gradient(SplitLaw law, const ElasticModel& m, const SymTensor2& eps, int iters = 200) {
    auto project = [&](const SymTensor2& y) {
        if (law == SplitLaw::vol_dev) {
            const double tr = y.trace();
            return tr >= 0.0 ? y : y - (tr / 3.0) * SymTensor2::identity();
        }
        Eigen::SelfAdjointEigenSolver<Mat3> es(y.dense());
        const Vec3 v = es.eigenvalues().cwiseMax(0.0);
        const Mat3 p = es.eigenvectors() * v.asDiagonal() * es.eigenvectors().transpose();
        return to_kelvin(0.5 * (p + p.transpose()));
    };
    // Objective in the original variables: 1/2 (eps - e) . C (eps - e) with e = C^{-1/2} y.
    SymTensor2 y = SymTensor2::zero();
    const double step = 0.5;
    for (int k = 0; k < iters; ++k) {
        const SymTensor2 e = m.C_half_inv() * y;
        const SymTensor2 grad = m.C_half_inv() * (m.C() * (e - eps));
        y = project(y - step * grad);
    }
    return m.C_half_inv() * y;
}

/// split() agrees with the closed-form cone projection and, on a subset, with
/// an iterative minimizer of the same variational problem.
inline void suite_oracle(SuiteReport& r, Rng& rng, int n, int n_pg) {
    for (SplitLaw law : kCrackLaws) {
        auto& closed = r.check("projection/" + std::string(to_string(law)), 1e-9);
        auto& iterative = r.check("projected-gradient/" + std::string(to_string(law)), 1e-6);
        for (int i = 0; i < n; ++i) {
            const ElasticModel m = random_model(kAllClasses[i % 4], rng);
            const SymTensor2 eps = random_strain(rng);
            const SymTensor2 et = split(law, m, eps).eps_t;
            closed.record((et - oracle_projection(law, m, eps)).norm() / eps.norm());
            if (i < n_pg) iterative.record((et - projected_gradient(law, m, eps)).norm() / eps.norm());
        }
    }
}

/// Distance of eps to the switching set of the law in units of |eps~|:
/// the transformed trace (vol_dev) or the smallest |eigenvalue| and eigen-gap
/// (no_tension).
inline double switching_margin(SplitLaw law, const SplitState& s) {
    const double scale = s.eps_tilde.norm();
    if (law == SplitLaw::vol_dev) return std::abs(s.eps_tilde.trace()) / scale;
    const Spectral2 sp = eig_sym2(s.eps_tilde);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) margin = std::min(margin, std::abs(sp.values[i]));
    for (int i = 0; i < 2; ++i) margin = std::min(margin, sp.values[i] - sp.values[i + 1]);
    return margin / scale;
}

/// sigma^t = d psi^t / d eps and C^t = d sigma^t / d eps by central differences.
inline void suite_gradient(SuiteReport& r, Rng& rng, int n) {
    for (SplitLaw law : kCrackLaws) {
        const std::string ln(to_string(law));
        auto& stress = r.check("stress/" + ln, 1e-6);
        auto& tangent = r.check("tangent/" + ln, 1e-5);
        auto& sum = r.check("tangent-sum/" + ln, 1e-10);
        for (int i = 0; i < n; ++i) {
            const ElasticModel m = random_model(kAllClasses[i % 4], rng);
            const SymTensor2 eps = random_strain(rng);
            const SplitState s = split(law, m, eps);
            sum.record((s.C_t.matrix() + s.C_c.matrix() - m.C().matrix()).norm() / m.C().norm());
            if (switching_margin(law, s) < 1e-3) {
                ++stress.skipped;
                ++tangent.skipped;
                continue;
            }
            const double h = 1e-6 * eps.norm();
            Vec6 grad;
            Mat6 hess;
            for (int k = 0; k < 6; ++k) {
                Vec6 dv = Vec6::Zero();
                dv[k] = h;
                const SplitState p = split(law, m, SymTensor2{Vec6(eps.kelvin() + dv)});
                const SplitState q = split(law, m, SymTensor2{Vec6(eps.kelvin() - dv)});
                grad[k] = (p.psi_t - q.psi_t) / (2.0 * h);
                hess.col(k) = (p.sigma_t.kelvin() - q.sigma_t.kelvin()) / (2.0 * h);
            }
            const double sig_scale = std::max(s.sigma_t.norm(), 1e-3 * (m.C() * eps).norm());
            stress.record((grad - s.sigma_t.kelvin()).norm() / sig_scale);
            const double c_scale = std::max(s.C_t.norm(), 1e-3 * m.C().norm());
            tangent.record((hess - s.C_t.matrix()).norm() / c_scale);
        }
    }
}

/// Rotating model and strain together rotates the split.
inline void suite_rotation(SuiteReport& r, Rng& rng, int n) {
    const double pi = std::numbers::pi;
    for (SplitLaw law : kCrackLaws) {
        const std::string ln(to_string(law));
        const std::pair<const char*, double> angles[] = {
            {"pi/4", pi / 4.0}, {"-pi/4", -pi / 4.0}, {"pi/2", pi / 2.0}, {"random", std::nan("")}};
        for (const auto& [an, fixed] : angles) {
            auto& check = r.check(std::string("alpha=") + an + "/" + ln, 1e-9);
            for (int i = 0; i < n; ++i) {
                const double a = std::isnan(fixed) ? uniform(rng, -pi, pi) : fixed;
                const ElasticModel m = random_model(kAllClasses[i % 4], rng);
                const SymTensor2 eps = random_strain(rng);
                const KelvinOperator p = rotation_about_z(a);
                const SplitState base = split(law, m, eps);
                const SplitState rot = split(law, m.rotated(a), p * eps);
                const double err = std::max((rot.eps_t - p * base.eps_t).norm(), (rot.eps_c - p * base.eps_c).norm());
                check.record(err / eps.norm());
            }
        }
    }
}

}  // namespace detail

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"orthogonality", "partition", "sqrt",    "appendix-cases",
                                                "oracle",        "gradient",  "rotation"};
    return names;
}

/// Runs one named suite; `cases` is the sample count per class/law.
inline SuiteReport run_suite(const std::string& name, std::uint64_t seed = 42, int cases = 1000) {
    SuiteReport r;
    r.suite = name;
    r.seed = seed;
    Rng rng(seed);
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "orthogonality") detail::suite_orthogonality(r, rng, cases);
    else if (name == "partition") detail::suite_partition(r, rng, cases);
    else if (name == "sqrt") detail::suite_sqrt(r, rng, cases);
    else if (name == "appendix-cases") detail::suite_appendix(r);
    else if (name == "oracle") detail::suite_oracle(r, rng, cases, std::min(cases, 50));
    else if (name == "gradient") detail::suite_gradient(r, rng, cases);
    else if (name == "rotation") detail::suite_rotation(r, rng, cases);
    else throw UnknownSuite("unknown suite '" + name + "'");
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace pfaniso
