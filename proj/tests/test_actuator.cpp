#include <catch_amalgamated.hpp>

#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "pouchsim/actuator.hpp"
#include "pouchsim/material.hpp"

using namespace pouchsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("design space is the 4 x 5 cross product", "[actuator]") {
    const auto designs = design_space();
    REQUIRE(designs.size() == 20);
    int one_cell = 0;
    for (const auto& d : designs) {
        CHECK_THAT(d.total_length, WithinAbs(0.254, 1e-12));
        CHECK_THAT(d.inflatable_length + 2.0 * d.anchor_length, WithinAbs(d.total_length, 1e-12));
        CHECK_THAT(d.cell_length() * d.n_cells, WithinAbs(d.inflatable_length, 1e-12));
        CHECK(std::find(kWidths.begin(), kWidths.end(), d.width) != kWidths.end());
        CHECK_NOTHROW(d.validate());
        if (d.n_cells == 1) {
            ++one_cell;
            CHECK_THAT(d.cell_length(), WithinAbs(0.15240, 1e-9));
        }
        if (d.n_cells == 4) CHECK_THAT(d.cell_length(), WithinAbs(0.03810, 1e-9));
    }
    CHECK(one_cell == 5);
    CHECK(designs.front().id() == "1c-50.80");
    CHECK(designs.back().id() == "4c-25.40");
}

TEST_CASE("strip mass falls in the reported weight band", "[actuator]") {
    const auto mat = nylon_oxford();
    for (const auto& d : design_space()) {
        const double grams = d.strip_mass(mat) * 1e3;
        CHECK(grams >= 3.8 * 0.8);
        CHECK(grams <= 8.2 * 1.2);
    }
}

TEST_CASE("fabric record matches the material table", "[actuator]") {
    const auto m = nylon_oxford();
    CHECK_NOTHROW(m.validate());
    CHECK(m.poisson_ratio > 0.0);
    CHECK(m.poisson_ratio < 0.5);
    CHECK(m.yield_strength <= m.compressive_strength);
    CHECK_THAT(m.wall_thickness, WithinAbs(0.4e-3, 1e-12));
    auto bad = m;
    bad.poisson_ratio = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = m;
    bad.yield_strength = m.compressive_strength * 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = m;
    bad.elastic_modulus = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("invalid designs are rejected", "[actuator]") {
    CHECK_THROWS_AS(make_design(5, kWidths[0]), std::invalid_argument);
    CHECK_THROWS_AS(make_design(0, kWidths[0]), std::invalid_argument);
    CHECK_THROWS_AS(make_design(1, 0.040), std::invalid_argument);
    CHECK_THROWS_AS(make_design(1, kWidths[0], 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_design(1, kWidths[0], 1.5), std::invalid_argument);
}

TEST_CASE("pouch section agrees with a traced polygon", "[actuator][oracle]") {
    for (double lc : {0.1524, 0.0762, 0.0508, 0.0381}) {
        for (double t : {0.05, 0.3, 0.8, 1.2, kHalfPi}) {
            const auto s = pouch_geometry(lc, t);
            const auto o = oracle::refined_section(lc, t);
            CHECK_THAT(s.height, WithinRel(o.height, 1e-10));
            CHECK_THAT(s.chord, WithinRel(o.chord, 1e-10));
            CHECK_THAT(s.cross_area, WithinRel(o.area, 1e-8));
            // the membrane is inextensible: both arcs together always span 2 Lc
            CHECK_THAT(o.perimeter, WithinRel(2.0 * lc, 1e-8));
            CHECK_THAT(4.0 * s.radius * t, WithinRel(2.0 * lc, 1e-12));
        }
    }
}

TEST_CASE("pouch section reference values", "[actuator]") {
    const auto full = pouch_geometry(0.1524, kHalfPi);
    CHECK_THAT(full.height, WithinAbs(0.09702, 5e-6));
    CHECK_THAT(full.chord, WithinAbs(0.09702, 5e-6));
    CHECK_THAT(full.height, WithinRel(2.0 * 0.1524 / kPi, 1e-12));
    CHECK_THAT(full.cross_area, WithinRel(0.1524 * 0.1524 / kPi, 1e-12));
    CHECK_THAT(pouch_height(0.0762, kHalfPi), WithinAbs(0.04851, 5e-6));

    const auto flat = pouch_geometry(0.1524, 0.0);
    CHECK(flat.height == 0.0);
    CHECK(flat.cross_area == 0.0);
    CHECK_THAT(flat.chord, WithinAbs(0.1524, 1e-15));

    CHECK_THROWS_AS(pouch_geometry(0.1524, -1e-3), std::domain_error);
    CHECK_THROWS_AS(pouch_geometry(0.1524, kHalfPi + 1e-6), std::domain_error);
}

TEST_CASE("pouch section is monotone in the arc half-angle", "[actuator][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(1e-4, kHalfPi);
    std::uniform_real_distribution<double> ul(0.02, 0.2);
    for (int i = 0; i < 2000; ++i) {
        const double lc = ul(rng);
        double a = ut(rng), b = ut(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-9) continue;
        const auto sa = pouch_geometry(lc, a), sb = pouch_geometry(lc, b);
        CHECK(sa.height < sb.height);
        CHECK(sa.cross_area < sb.cross_area);
        CHECK(sa.chord > sb.chord);
        CHECK(sa.radius > sb.radius);
    }
}

TEST_CASE("closed-form derivatives match central differences", "[actuator][oracle]") {
    const double h = 1e-6;
    for (const auto& d : design_space()) {
        for (double t : {0.3, 0.8, 1.4}) {
            const double fd_v = (cell_volume(d, t + h) - cell_volume(d, t - h)) / (2.0 * h);
            CHECK_THAT(cell_volume_derivative(d, t), WithinRel(fd_v, 1e-6));
            const double lc = d.cell_length();
            const double fd_h = (pouch_height(lc, t + h) - pouch_height(lc, t - h)) / (2.0 * h);
            CHECK_THAT(pouch_height_derivative(lc, t), WithinRel(fd_h, 1e-6));
        }
    }
    // the small-angle branches join the closed forms smoothly
    for (double t : {0.04, 0.0499, 0.0501, 0.099, 0.101}) {
        const double fd = (pouch_area(1.0, t + 1e-7) - pouch_area(1.0, t - 1e-7)) / 2e-7;
        CHECK_THAT(pouch_area_derivative(1.0, t), WithinRel(fd, 1e-6));
        const double fdh = (pouch_height(1.0, t + 1e-7) - pouch_height(1.0, t - 1e-7)) / 2e-7;
        CHECK_THAT(pouch_height_derivative(1.0, t), WithinRel(fdh, 1e-6));
    }
}

TEST_CASE("cell volume reference values", "[actuator]") {
    const auto one = make_design(1, 50.80e-3, 1.0);
    const auto two = make_design(2, 50.80e-3, 1.0);
    CHECK_THAT(pouch_area(one.cell_length(), kHalfPi), WithinAbs(7.393e-3, 5e-7));
    CHECK_THAT(full_volume(one), WithinRel(3.756e-4, 1e-3));
    CHECK_THAT(full_volume(two), WithinRel(full_volume(one) / 2.0, 1e-12));
    CHECK(cell_volume(one, 0.0) == 0.0);
    CHECK_THAT(cell_volume(make_design(3, kWidths[2], 0.5), 1.0),
               WithinRel(3 * pouch_area(0.0508, 1.0) * kWidths[2] * 0.5, 1e-12));
}

TEST_CASE("fill inverses round-trip", "[actuator][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.0, kHalfPi);
    for (int i = 0; i < 500; ++i) {
        const double t = ut(rng);
        CHECK_THAT(half_angle_from_area_fraction(area_fraction(t)), WithinAbs(t, 1e-9));
        const double lc = 0.0762;
        CHECK_THAT(half_angle_from_height(lc, pouch_height(lc, t)), WithinAbs(t, 1e-9));
    }
    CHECK(half_angle_from_area_fraction(0.0) == 0.0);
    CHECK_THAT(half_angle_from_area_fraction(1.0), WithinAbs(kHalfPi, 1e-12));
    // out-of-range requests clamp to the flat and fully round sections
    CHECK(half_angle_from_area_fraction(1.1) == kHalfPi);
    CHECK(half_angle_from_area_fraction(-0.1) == 0.0);
    CHECK(half_angle_from_height(0.0762, max_pouch_height(0.0762) * 1.01) == kHalfPi);
}

TEST_CASE("wedge kinematics", "[actuator]") {
    const auto one = make_design(1, kWidths[0]);
    const auto two = make_design(2, kWidths[0]);
    CHECK(shoulder_angle_from_fill(one, 0.0, 0.09).angle == 0.0);

    // full 1-cell pouch against d = 0.0917 m, checked through the inverse relation h = 2 d sin(theta/2)
    const auto w = shoulder_angle_from_fill(one, kHalfPi, 0.0917);
    CHECK_FALSE(w.saturated);
    CHECK_THAT(rad_to_deg(w.angle), WithinAbs(63.9, 0.05));
    CHECK_THAT(2.0 * 0.0917 * std::sin(w.angle / 2.0), WithinRel(max_pouch_height(0.1524), 1e-12));

    for (const auto& d : design_space()) {
        CHECK(shoulder_angle_from_fill(d, 0.4, 0.08).angle < shoulder_angle_from_fill(d, 0.8, 0.08).angle);
    }
    CHECK(shoulder_angle_from_fill(one, kHalfPi, 0.08).angle > shoulder_angle_from_fill(two, kHalfPi, 0.08).angle);

    const auto sat = wedge_angle(0.1, 0.04);
    CHECK(sat.saturated);
    CHECK_THAT(sat.angle, WithinAbs(kPi, 1e-15));
    CHECK_THROWS_AS(shoulder_angle_derivative(one, kHalfPi, 0.04), std::domain_error);
}

TEST_CASE("lift torque satisfies virtual work", "[actuator][oracle]") {
    // integral of tau over the shoulder angle equals P times the swept volume
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    for (const auto& d : design_space()) {
        const double dist = 0.09;
        const double p = 5000.0;
        for (double t1 : {0.3, 0.9, 1.5}) {
            if (shoulder_angle_from_fill(d, t1, dist).saturated) continue;
            auto integrand = [&](double t) {
                return lift_torque(d, t, p, dist) * shoulder_angle_derivative(d, t, dist);
            };
            const double work = gk.integrate(integrand, 1e-9, t1, 15, 1e-13);
            CHECK_THAT(work, WithinRel(p * cell_volume(d, t1), 1e-6));
        }
    }
}

TEST_CASE("lift torque scaling", "[actuator]") {
    const auto a = make_design(1, kWidths[2]);
    auto wide = a;
    wide.width = 2.0 * a.width;
    CHECK(lift_torque(a, 0.7, 0.0, 0.09) == 0.0);
    CHECK_THAT(lift_torque(wide, 0.7, 3000.0, 0.09), WithinRel(2.0 * lift_torque(a, 0.7, 3000.0, 0.09), 1e-12));
    CHECK_THAT(lift_torque(a, 0.7, 6000.0, 0.09), WithinRel(2.0 * lift_torque(a, 0.7, 3000.0, 0.09), 1e-12));
    CHECK(lift_torque(a, 0.7, 3000.0, 0.09) > 0.0);
    CHECK_THROWS(lift_torque(a, 0.7, -1.0, 0.09));
}

TEST_CASE("hoop stress", "[actuator]") {
    const auto mat = nylon_oxford();
    const auto one = make_design(1, kWidths[0]);
    CHECK(hoop_stress(one, kHalfPi, 0.0) == 0.0);
    CHECK_THAT(pouch_radius(0.1524, kHalfPi), WithinAbs(0.04851, 5e-6));
    CHECK_THAT(hoop_stress(one, kHalfPi, 1.0), WithinRel(0.1524 / kPi / mat.wall_thickness, 1e-12));
    CHECK_THAT(hoop_stress(one, 1.0, 2000.0), WithinRel(2.0 * hoop_stress(one, 1.0, 1000.0), 1e-12));
    for (int n = 1; n < 4; ++n) {
        CHECK(hoop_stress(make_design(n, kWidths[0]), 1.0, 1000.0) > hoop_stress(make_design(n + 1, kWidths[0]), 1.0, 1000.0));
    }
}

TEST_CASE("contact distance follows the cell length", "[actuator]") {
    const ContactGeometry c{0.03, 0.7};
    CHECK_THAT(c.distance(make_design(1, kWidths[0])), WithinAbs(0.03 + 0.7 * 0.0762, 1e-12));
    CHECK_THAT(c.distance(make_design(2, kWidths[0])), WithinAbs(0.03 + 0.7 * 0.0381, 1e-12));
    CHECK_THAT(pocket_equivalent_width_factor(0.009, 0.1524), WithinAbs(kPi * kPi * 0.009 / (4.0 * 0.1524), 1e-12));
}
