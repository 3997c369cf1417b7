#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "spintrap/modes.hpp"
#include "support/polyroots.hpp"

using namespace spintrap;
using Catch::Approx;

namespace {
double backward_residual(double K, Symmetry sym, Orientation o, std::complex<double> w) {
    return spintrap::detail::cubic_residual(secular_cubic(K, sym, o), w);
}

std::complex<double> root_nearest(const std::array<std::complex<double>, 3>& roots,
                                  std::complex<double> target) {
    return *std::min_element(roots.begin(), roots.end(), [&](auto a, auto b) {
        return std::abs(a - target) < std::abs(b - target);
    });
}
} // namespace

TEST_CASE("small-K asymptotics of the three spin-down modes") {
    for (double K : {1e-3, 1e-4}) {
        const double bound = 5.0 * K * K;
        const auto gp = secular_roots(K, Symmetry::gamma_plus, Orientation::spin_down);
        const auto gm = secular_roots(K, Symmetry::gamma_minus, Orientation::spin_down);
        CHECK(std::abs(root_nearest(gp, 1.0) - (1.0 - K / 2.0)) < bound);
        CHECK(std::abs(root_nearest(gm, 1.0) - (1.0 + K / 2.0)) < bound);
        CHECK(std::abs(root_nearest(gm, 1.0 / K) - (1.0 / K - K)) < bound);
    }
}

TEST_CASE("critical adiabaticity and the sqrt(3) merge") {
    CHECK(critical_adiabaticity() == Approx(std::sqrt(4.0 / 27.0)).epsilon(1e-15));
    const auto loc = locate_gamma_minus_double_root();
    CHECK(std::abs(loc.K - std::sqrt(4.0 / 27.0)) < 1e-10);
    CHECK(std::abs(loc.merge_frequency - std::sqrt(3.0)) < 1e-10);
    // cubic and derivative share the root 2/(3 K_c) = sqrt(3) at K_c
    const double kc = critical_adiabaticity();
    CHECK(2.0 / (3.0 * kc) == Approx(std::sqrt(3.0)).epsilon(1e-14));
    const auto c = secular_cubic(kc, Symmetry::gamma_minus, Orientation::spin_down);
    const double w = std::sqrt(3.0);
    CHECK(std::abs(c[0] + c[1] * w + c[2] * w * w + c[3] * w * w * w) < 1e-12);
    CHECK(std::abs(c[1] + 2 * c[2] * w + 3 * c[3] * w * w) < 1e-12);
}

TEST_CASE("root structure on both sides of K_c") {
    const double kc = critical_adiabaticity();
    const auto below = secular_roots(kc * (1 - 1e-3), Symmetry::gamma_minus,
                                     Orientation::spin_down);
    for (const auto& r : below) CHECK(r.imag() == 0.0);
    CHECK(std::abs(below[0] - below[1]) > 0.0);

    const auto above = secular_roots(kc * (1 + 1e-3), Symmetry::gamma_minus,
                                     Orientation::spin_down);
    int complex_count = 0;
    for (const auto& r : above)
        if (std::abs(r.imag()) > 1e-8) ++complex_count;
    CHECK(complex_count == 2);
}

TEST_CASE("spin-up state carries a complex pair for any K") {
    for (double K : {0.01, 0.1, 1.0}) {
        const auto roots = secular_roots(K, Symmetry::gamma_plus, Orientation::spin_up);
        int complex_count = 0;
        double max_im = 0.0;
        for (const auto& r : roots) {
            if (std::abs(r.imag()) > 1e-10) ++complex_count;
            max_im = std::max(max_im, r.imag());
        }
        CHECK(complex_count == 2);
        CHECK(max_im > 1e-3); // genuinely unstable, not a rounding artifact
    }
}

TEST_CASE("Gamma+ roots are the negated Gamma- roots") {
    for (double K : {0.01, 0.2, critical_adiabaticity(), 0.9, 5.0}) {
        for (auto orient : {Orientation::spin_down, Orientation::spin_up}) {
            auto gp = secular_roots(K, Symmetry::gamma_plus, orient);
            auto gm = secular_roots(K, Symmetry::gamma_minus, orient);
            for (const auto& r : gp) {
                const auto m = root_nearest(gm, -r);
                CHECK(std::abs(m + r) < 1e-12 * std::max(1.0, std::abs(r)));
            }
        }
    }
}

TEST_CASE("Vieta sums and products, backward residuals") {
    for (double K : {1e-3, 0.05, 0.3849, 1.0, 10.0}) {
        for (auto sym : {Symmetry::gamma_plus, Symmetry::gamma_minus}) {
            for (auto o : {Orientation::spin_down, Orientation::spin_up}) {
                const auto c = secular_cubic(K, sym, o);
                const auto r = secular_roots(K, sym, o);
                const auto sum = r[0] + r[1] + r[2];
                const auto prod = r[0] * r[1] * r[2];
                CHECK(std::abs(sum - (-c[2] / c[3])) <= 1e-12 * std::max(1.0, std::abs(sum)));
                CHECK(std::abs(prod - (-c[0] / c[3])) <= 1e-12 * std::max(1.0, std::abs(prod)));
                for (const auto& root : r) CHECK(backward_residual(K, sym, o, root) < 1e-12);
            }
        }
    }
}

TEST_CASE("eigenvectors solve the 2x2 secular system") {
    for (double K : {0.01, 0.1, 0.5}) {
        for (auto sym : {Symmetry::gamma_plus, Symmetry::gamma_minus}) {
            const auto roots = secular_roots(K, sym, Orientation::spin_down);
            for (const auto& w : roots) {
                const auto v = eigenvector_for(K, w, 0.7);
                CHECK(eigenvector_residual(K, w, v, sym, Orientation::spin_down) < 1e-10);
            }
        }
    }
    CHECK_THROWS_AS(eigenvector_for(0.1, 0.0, 1.0), singular_mode_error);
}

TEST_CASE("eigenvector limits: slow modes and the precessional spin dominance") {
    const double K = 1e-6;
    const auto gm = secular_roots(K, Symmetry::gamma_minus, Orientation::spin_down);
    const auto slow = root_nearest(gm, 1.0);
    const auto v = eigenvector_for(K, slow, 1.0);
    CHECK(std::abs(v.rho_0 - 1.0) < 2e-6);  // rho_0 -> A
    CHECK(std::abs(v.eps_0 + 1.0) < 2e-6);  // eps_0 -> -A

    const double K2 = 0.01;
    const auto fast = root_nearest(secular_roots(K2, Symmetry::gamma_minus,
                                                 Orientation::spin_down),
                                   1.0 / K2);
    const auto vp = eigenvector_for(K2, fast, 1.0);
    const double ratio = std::abs(vp.eps_0 / vp.rho_0);
    CHECK(ratio * K2 * K2 == Approx(1.0).epsilon(5e-3)); // |eps/rho| ~ 1/K^2
}

TEST_CASE("excitation energy: sign per branch, zero at the merge") {
    CHECK(excitation_energy_scaled(0.3, std::sqrt(3.0), 0.5) == Approx(0.0).margin(1e-15));
    for (double K : {0.05, 0.2, 0.35}) {
        const auto modes = spin_down_modes(K, 0.3);
        for (const auto& m : modes) {
            const double w = m.omega_n.real();
            const double xi = excitation_energy_scaled(K, w, 0.3);
            if (m.branch == Branch::precessional)
                CHECK(xi < 0.0);
            else
                CHECK(xi > 0.0);
        }
    }
    CHECK_THROWS_AS(excitation_energy_scaled_checked(0.5, {1.0, 0.5}, 1.0), domain_error);
}

TEST_CASE("friction shift: signs stabilize vibration, destabilize precession") {
    for (double K : {0.05, 0.2, 0.35}) {
        const auto modes = spin_down_modes(K);
        for (const auto& m : modes) {
            const double w = m.omega_n.real();
            for (auto [rt, rp] : {std::pair{1e-4, 0.0}, {0.0, 1e-4}, {5e-5, 5e-5}}) {
                const auto shift = friction_shift(K, w, rt, rp);
                if (m.branch == Branch::precessional)
                    CHECK(shift.imag() > 0.0);
                else
                    CHECK(shift.imag() < 0.0);
            }
        }
    }
    CHECK_THROWS_AS(friction_shift(0.2, std::sqrt(3.0), 1e-4, 1e-4), degenerate_mode_error);
    CHECK_THROWS_AS(friction_shift(0.2, 1.0, -1e-4, 0.0), domain_error);
}

TEST_CASE("first-order shift against the damped secular polynomial oracle") {
    const double K = 0.1;
    const auto frictionless = secular_roots(K, Symmetry::gamma_minus, Orientation::spin_down);

    auto residual_for = [&](double r_over_S) {
        // equal translational and precessional friction groups
        const auto coeffs6 = damped_secular_coefficients(K, r_over_S, r_over_S);
        std::vector<std::complex<double>> cv(coeffs6.begin(), coeffs6.end());
        const auto damped = testsupport::polynomial_roots(cv);
        double worst = 0.0;
        for (const auto& w0 : frictionless) {
            const auto predicted = w0 + friction_shift(K, w0.real(), r_over_S, r_over_S);
            double best = 1e300;
            for (const auto& d : damped) best = std::min(best, std::abs(d - predicted));
            worst = std::max(worst, best);
        }
        return worst;
    };

    const double r1 = residual_for(1e-4);
    const double r2 = residual_for(5e-5);
    CHECK(r1 < 1e-6);
    CHECK(r1 / r2 == Approx(4.0).epsilon(0.25)); // quadratic shrinkage
}

TEST_CASE("sweep: stability flips once at K_c, conjugate pair beyond") {
    const auto rows = sweep(0.01, 0.6, 600);
    REQUIRE(rows.size() == 600);
    const double kc = critical_adiabaticity();
    int flips = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].stable != rows[i - 1].stable) {
            ++flips;
            CHECK(rows[i - 1].K <= kc * (1 + 1e-6));
            CHECK(rows[i].K >= kc * (1 - 1e-6));
        }
    }
    CHECK(flips == 1);
    for (const auto& row : rows) {
        if (row.K < kc * (1 - 1e-6)) CHECK(row.stable);
        if (row.K > kc * (1 + 1e-6)) CHECK_FALSE(row.stable);
        if (!row.stable) {
            // the vib- / precessional slots hold the conjugate pair
            const auto& a = row.modes[1].omega_n;
            const auto& b = row.modes[2].omega_n;
            CHECK(a.real() == Approx(b.real()).epsilon(1e-12));
            CHECK(a.imag() == Approx(-b.imag()).epsilon(1e-12));
            CHECK(a.real() > 0.0);
        }
    }
    // branches collide at sqrt(3): nearest row to K_c has both near sqrt(3)
    auto nearest = std::min_element(rows.begin(), rows.end(), [&](auto& a, auto& b) {
        return std::abs(a.K - kc) < std::abs(b.K - kc);
    });
    CHECK(std::abs(nearest->modes[1].omega_n.real() - std::sqrt(3.0)) < 0.1);
    CHECK(std::abs(nearest->modes[2].omega_n.real() - std::sqrt(3.0)) < 0.1);
}

TEST_CASE("sweep input validation") {
    CHECK_THROWS_AS(sweep(0.1, 0.6, 1), domain_error);
    CHECK_THROWS_AS(sweep(-0.1, 0.6, 10), domain_error);
    CHECK_THROWS_AS(sweep(0.6, 0.1, 10), domain_error);
    CHECK_THROWS_AS(secular_roots(0.0, Symmetry::gamma_minus, Orientation::spin_down),
                    domain_error);
}

TEST_CASE("branch labels at small K") {
    const auto modes = spin_down_modes(0.01);
    for (const auto& m : modes) {
        if (m.branch == Branch::vibrational_plus) {
            CHECK(m.symmetry == Symmetry::gamma_plus);
            CHECK(m.omega_n.real() == Approx(1.0 - 0.005).epsilon(1e-3));
        } else if (m.branch == Branch::vibrational_minus) {
            CHECK(m.symmetry == Symmetry::gamma_minus);
            CHECK(m.omega_n.real() == Approx(1.0 + 0.005).epsilon(1e-3));
        } else {
            CHECK(m.symmetry == Symmetry::gamma_minus);
            CHECK(m.omega_n.real() == Approx(100.0 - 0.01).epsilon(1e-3));
        }
    }
}
