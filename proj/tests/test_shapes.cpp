#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "graylith/shapes.hpp"
#include "test_util.hpp"

using namespace graylith;
using namespace testutil;

namespace {

WorkingArea die_area() { return {250.0, 250.0, 500, 500}; } // 0.5 um pitch

double field_min(const HeightField& f) {
    return *std::min_element(f.removal.begin(), f.removal.end());
}
double field_max(const HeightField& f) {
    return *std::max_element(f.removal.begin(), f.removal.end());
}

HeightField downsample_2x2(const HeightField& fine) {
    WorkingArea coarse_area{fine.area.width_um, fine.area.height_um,
                            fine.area.px_w / 2, fine.area.px_h / 2};
    HeightField coarse(coarse_area);
    for (int i = 0; i < coarse_area.px_h; ++i)
        for (int j = 0; j < coarse_area.px_w; ++j)
            coarse.at(i, j) = (fine.at(2 * i, 2 * j) + fine.at(2 * i, 2 * j + 1) +
                               fine.at(2 * i + 1, 2 * j) + fine.at(2 * i + 1, 2 * j + 1)) /
                              4.0;
    return coarse;
}

} // namespace

TEST_CASE("shape kind names round-trip") {
    for (ShapeKind k : {ShapeKind::ramp, ShapeKind::stairs, ShapeKind::sinusoid,
                        ShapeKind::lens_array, ShapeKind::pyramid, ShapeKind::cone,
                        ShapeKind::cylinder, ShapeKind::cube, ShapeKind::hemisphere})
        CHECK(shape_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(shape_kind_from_string("torus"), ValidationError);
}

TEST_CASE("ramp removal at a pixel center") {
    ShapeSpec s;
    s.kind = ShapeKind::ramp;
    HeightField f = generate_shape(s, die_area());

    // column 250 has center u = 125.25 um; 15 * 125.25 / 250 = 7.515
    CHECK(std::abs(f.at(0, 250) - 7.515) <= 1e-9);
    CHECK(std::abs(f.at(499, 250) - 7.515) <= 1e-9);

    // first and last columns
    CHECK(std::abs(f.at(10, 0) - 15.0 * 0.25 / 250.0) <= 1e-12);
    CHECK(std::abs(f.at(10, 499) - 15.0 * 249.75 / 250.0) <= 1e-12);

    // strictly increasing along +u, constant along v
    for (int j = 1; j < 500; ++j) CHECK(f.at(7, j) > f.at(7, j - 1));
    for (int i = 1; i < 500; ++i) CHECK(f.at(i, 123) == f.at(0, 123));
}

TEST_CASE("stairs land on exact treads") {
    ShapeSpec s;
    s.kind = ShapeKind::stairs;
    s.n_steps = 5;
    HeightField f = generate_shape(s, die_area());

    // just past w/5 = 50: column 100 has center u = 50.25 -> second tread
    CHECK(f.at(0, 100) == 6.0);
    // just before the boundary: u = 49.75 -> first tread
    CHECK(f.at(0, 99) == 3.0);
    // deepest tread reaches max_depth
    CHECK(f.at(0, 499) == 15.0);

    SECTION("exactly n_steps distinct levels") {
        std::set<double> levels;
        for (int j = 0; j < 500; ++j) levels.insert(f.at(250, j));
        CHECK(levels == std::set<double>{3.0, 6.0, 9.0, 12.0, 15.0});
    }

    SECTION("monotone along u") {
        for (int j = 1; j < 500; ++j) CHECK(f.at(42, j) >= f.at(42, j - 1));
    }

    SECTION("formula clamps at u == w") {
        CHECK(shape_removal(s, 250.0, 10.0) == 15.0);
    }

    SECTION("single step is a flat slab") {
        s.n_steps = 1;
        HeightField g = generate_shape(s, die_area());
        CHECK(field_min(g) == 15.0);
        CHECK(field_max(g) == 15.0);
    }
}

TEST_CASE("sinusoid pair: doubled frequency, identical heights") {
    // Frequencies/phases picked so both grids sample the sine extrema exactly:
    // f = 0.02 with phase 0.49*pi and f = 0.04 with phase 0.48*pi both hit
    // sin = +1 and sin = -1 on 0.5 um pixel centers.
    ShapeSpec a;
    a.kind = ShapeKind::sinusoid;
    a.freq_x_per_um = a.freq_y_per_um = 0.02;
    a.phase_rad = 0.49 * std::numbers::pi;

    ShapeSpec b = a;
    b.freq_x_per_um = b.freq_y_per_um = 0.04;
    b.phase_rad = 0.48 * std::numbers::pi;

    HeightField fa = generate_shape(a, die_area());
    HeightField fb = generate_shape(b, die_area());

    double min_a = field_min(fa), max_a = field_max(fa);
    double min_b = field_min(fb), max_b = field_max(fb);

    CHECK(std::abs(min_a) <= 1e-12);
    CHECK(std::abs(min_b) <= 1e-12);
    CHECK(std::abs(max_a - 15.0) <= 1e-12);
    CHECK(std::abs(max_b - 15.0) <= 1e-12);
    CHECK(std::abs(min_a - min_b) <= 1e-12);
    CHECK(std::abs(max_a - max_b) <= 1e-12);
}

TEST_CASE("sinusoid bounds") {
    SECTION("default amplitude stays within [0, max_depth]") {
        ShapeSpec s;
        s.kind = ShapeKind::sinusoid;
        s.width_um = s.height_um = 50.0;
        auto& gen = rng();
        std::uniform_real_distribution<double> freq(0.0, 0.1), ph(0.0, 6.283);
        for (int trial = 0; trial < 10; ++trial) {
            s.freq_x_per_um = freq(gen);
            s.freq_y_per_um = freq(gen);
            s.phase_rad = ph(gen);
            HeightField f = generate_shape(s, {50.0, 50.0, 100, 100});
            CHECK(field_min(f) >= 0.0);
            CHECK(field_max(f) <= 15.0);
        }
    }

    SECTION("explicit amplitude narrows the band") {
        ShapeSpec s;
        s.kind = ShapeKind::sinusoid;
        s.amplitude_um = 5.0;
        HeightField f = generate_shape(s, die_area());
        CHECK(field_min(f) >= 2.5);
        CHECK(field_max(f) <= 12.5);
    }

    SECTION("amplitude above max_depth/2 is rejected") {
        ShapeSpec s;
        s.kind = ShapeKind::sinusoid;
        s.amplitude_um = 7.6;
        CHECK_THROWS_AS(generate_shape(s, die_area()), ValidationError);
    }
}

TEST_CASE("lens array spot values") {
    ShapeSpec s;
    s.kind = ShapeKind::lens_array;
    s.lens_diameter_um = 30.0; // radius 15, default sag = radius, pitch = diameter

    SECTION("apex, flank, rim, neighbouring cell") {
        // first lens center is (15, 15)
        CHECK(shape_removal(s, 15.0, 15.0) == 0.0);                      // apex
        CHECK(shape_removal(s, 18.0, 19.0) == 15.0 - std::sqrt(200.0));  // 3-4-5 flank
        CHECK(shape_removal(s, 24.0, 27.0) == 15.0);                     // on the rim circle
        CHECK(shape_removal(s, 27.0, 27.0) == 15.0);                     // cell corner, outside the cap
        // (30.25, 15) belongs to the second lens centered at (45, 15)
        double d2 = 15.0 * 15.0 - 14.75 * 14.75;
        CHECK(shape_removal(s, 30.25, 15.0) == 15.0 - std::sqrt(d2));
    }

    SECTION("explicit sag scales the cap") {
        s.dome_height_um = 10.0;
        CHECK(std::abs(shape_removal(s, 15.0, 15.0) - 5.0) <= 1e-12); // apex = max_depth - sag
        CHECK(shape_removal(s, 24.0, 27.0) == 15.0);                  // base unchanged
    }

    SECTION("sag beyond max_depth is rejected") {
        s.width_um = s.height_um = 60.0;
        s.dome_height_um = 15.5;
        CHECK_THROWS_AS(generate_shape(s, {60.0, 60.0, 120, 120}), ValidationError);
    }

    SECTION("generated 2x2 array") {
        s.width_um = s.height_um = 60.0;
        HeightField f = generate_shape(s, {60.0, 60.0, 120, 120});
        CHECK(field_max(f) == 15.0);
        // apexes are not pixel centers; nearest center sits 0.25 um off in u and v
        double near_apex = 15.0 - std::sqrt(15.0 * 15.0 - 2 * 0.25 * 0.25);
        CHECK(std::abs(field_min(f) - near_apex) <= 1e-12);
        // all four cells carry the same relief
        for (int i = 0; i < 60; ++i)
            for (int j = 0; j < 60; ++j) {
                CHECK(f.at(i, j) == f.at(i, j + 60));
                CHECK(f.at(i, j) == f.at(i + 60, j));
            }
    }
}

TEST_CASE("figure-style solids") {
    WorkingArea area{20.0, 20.0, 80, 80};
    ShapeSpec s;
    s.width_um = s.height_um = 20.0;
    s.base_size_um = 10.0; // default height = base size

    SECTION("pyramid") {
        s.kind = ShapeKind::pyramid;
        CHECK(shape_removal(s, 10.0, 10.0) == 5.0);   // apex: max_depth - height
        CHECK(shape_removal(s, 12.5, 10.0) == 10.0);  // halfway down a face
        CHECK(shape_removal(s, 12.0, 12.0) == 9.0);   // L-inf metric on the diagonal
        CHECK(shape_removal(s, 15.0, 10.0) == 15.0);  // base perimeter
        CHECK(shape_removal(s, 1.0, 1.0) == 15.0);    // far outside the base
    }

    SECTION("cone") {
        s.kind = ShapeKind::cone;
        CHECK(shape_removal(s, 10.0, 10.0) == 5.0);
        CHECK(shape_removal(s, 11.5, 12.0) == 10.0);  // radius 2.5 via a 3-4-5 triple
        CHECK(shape_removal(s, 13.0, 14.0) == 15.0);  // on the base circle
        CHECK(shape_removal(s, 12.0, 12.0) < shape_removal(s, 12.5, 12.5));
    }

    SECTION("cylinder") {
        s.kind = ShapeKind::cylinder;
        CHECK(shape_removal(s, 11.0, 12.0) == 5.0);   // inside the cross-section
        CHECK(shape_removal(s, 13.0, 14.0) == 15.0);  // rim is outside (strict interior)
        CHECK(shape_removal(s, 19.0, 19.0) == 15.0);
    }

    SECTION("cube") {
        s.kind = ShapeKind::cube;
        CHECK(shape_removal(s, 12.0, 13.0) == 5.0);
        CHECK(shape_removal(s, 15.0, 10.0) == 15.0);  // face plane is outside
        CHECK(shape_removal(s, 5.1, 10.0) == 5.0);    // just inside the -u face
    }

    SECTION("hemisphere") {
        s.kind = ShapeKind::hemisphere;
        CHECK(shape_removal(s, 10.0, 10.0) == 10.0);  // apex: max_depth - radius
        CHECK(shape_removal(s, 10.0, 13.0) == 11.0);  // sqrt(25 - 9) = 4
        CHECK(shape_removal(s, 13.0, 14.0) == 15.0);  // base circle
    }

    SECTION("explicit height") {
        s.kind = ShapeKind::pyramid;
        s.solid_height_um = 15.0;
        CHECK(shape_removal(s, 10.0, 10.0) == 0.0);
        s.solid_height_um = 15.1;
        CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    }
}

TEST_CASE("footprint placement") {
    WorkingArea area = default_working_area(); // 960 x 540

    SECTION("flush fit is allowed") {
        ShapeSpec s;
        s.origin_x_um = 710.0;
        s.origin_y_um = 290.0;
        CHECK_NOTHROW(generate_shape(s, area));
    }

    SECTION("overflow in x") {
        ShapeSpec s;
        s.origin_x_um = 800.0;
        CHECK_THROWS_AS(generate_shape(s, area), FootprintOverflow);
    }

    SECTION("negative origin") {
        ShapeSpec s;
        s.origin_y_um = -1.0;
        CHECK_THROWS_AS(generate_shape(s, area), FootprintOverflow);
    }

    SECTION("half-open sampling: [0, w) by [0, h)") {
        // origin 0.25 puts pixel centers exactly on both footprint edges
        WorkingArea small{30.0, 30.0, 60, 60};
        ShapeSpec s;
        s.kind = ShapeKind::stairs; // constant 15 with n_steps = 1: easy to spot
        s.n_steps = 1;
        s.origin_x_um = s.origin_y_um = 0.25;
        s.width_um = s.height_um = 10.0;
        HeightField f = generate_shape(s, small);
        CHECK(f.at(0, 0) == 15.0);  // center (0.25, 0.25) -> u = v = 0, included
        CHECK(f.at(0, 19) == 15.0); // center x = 9.75 -> u = 9.5, last inside
        CHECK(f.at(0, 20) == 0.0);  // center x = 10.25 -> u = 10.0 = w, excluded
    }

    SECTION("pixels outside the footprint stay zero") {
        ShapeSpec s;
        s.origin_x_um = 355.0;
        s.origin_y_um = 145.0;
        HeightField f = generate_shape(s, area);
        // footprint spans x [355, 605), y [145, 395)
        CHECK(f.at(289, 800) == 0.0);  // y = 144.75, just below
        CHECK(f.at(790, 800) == 0.0);  // y = 395.25, just above
        CHECK(f.at(540, 709) == 0.0);  // x = 354.75
        CHECK(f.at(540, 1210) == 0.0); // x = 605.25
        CHECK(f.at(540, 710) > 0.0);   // x = 355.25, first inside column
    }
}

TEST_CASE("overlapping shapes combine by max") {
    WorkingArea area = die_area();
    HeightField f(area);

    ShapeSpec ramp;
    add_shape(f, ramp);

    ShapeSpec post;
    post.kind = ShapeKind::cylinder;
    post.base_size_um = 100.0;
    post.solid_height_um = 15.0; // removal 0 inside the disc, 15 in the ring
    add_shape(f, post);

    // ring pixel: far from the disc, post contributes 15
    CHECK(f.at(50, 50) == 15.0);
    // disc pixel: post contributes 0, ramp survives the max
    CHECK(std::abs(f.at(250, 250) - 7.515) <= 1e-9);
}

TEST_CASE("relief inversion") {
    WorkingArea area = die_area();

    SECTION("all-zero inverts to all max_depth") {
        HeightField zero(area);
        HeightField inv = invert_relief(zero, 15.0);
        CHECK(field_min(inv) == 15.0);
        CHECK(field_max(inv) == 15.0);
    }

    SECTION("stairs: complement identity and bit-exact involution") {
        ShapeSpec s;
        s.kind = ShapeKind::stairs;
        HeightField f = generate_shape(s, area);
        HeightField inv = invert_relief(f, 15.0);
        for (std::size_t k = 0; k < f.removal.size(); ++k)
            CHECK(f.removal[k] + inv.removal[k] == 15.0);
        HeightField back = invert_relief(inv, 15.0);
        CHECK(back.removal == f.removal);
    }

    SECTION("dyadic random field: bit-exact involution") {
        auto& gen = rng();
        std::uniform_int_distribution<int> q(0, 15 * 64);
        HeightField f({10.0, 10.0, 32, 32});
        for (double& r : f.removal) r = q(gen) / 64.0;
        HeightField back = invert_relief(invert_relief(f, 15.0), 15.0);
        CHECK(back.removal == f.removal);
    }

    SECTION("ramp: involution within an ulp of max_depth") {
        ShapeSpec s;
        HeightField f = generate_shape(s, area);
        HeightField inv = invert_relief(f, 15.0);
        HeightField back = invert_relief(inv, 15.0);
        for (std::size_t k = 0; k < f.removal.size(); ++k)
            CHECK(std::abs(back.removal[k] - f.removal[k]) <= 4e-15);
        // descending: monotone opposite to the original
        for (int j = 1; j < 500; ++j) CHECK(inv.at(9, j) < inv.at(9, j - 1));
    }

    SECTION("removal beyond max_depth is an error") {
        HeightField f(area, 15.0);
        f.removal[17] = 15.0001;
        CHECK_THROWS_AS(invert_relief(f, 15.0), DepthOverflow);
        f.removal[17] = -0.0001;
        CHECK_THROWS_AS(invert_relief(f, 15.0), DepthOverflow);
    }
}

TEST_CASE("every generated field stays within [0, max_depth]") {
    auto& gen = rng();
    std::uniform_real_distribution<double> depth(0.5, 30.0);
    for (ShapeKind k : {ShapeKind::ramp, ShapeKind::stairs, ShapeKind::sinusoid,
                        ShapeKind::lens_array, ShapeKind::pyramid, ShapeKind::cone,
                        ShapeKind::cylinder, ShapeKind::cube, ShapeKind::hemisphere}) {
        ShapeSpec s;
        s.kind = k;
        s.width_um = s.height_um = 40.0;
        s.max_depth_um = depth(gen);
        s.base_size_um = 20.0;
        s.lens_diameter_um = 20.0;
        s.dome_height_um = s.max_depth_um / 2.0;
        s.solid_height_um = s.max_depth_um / 2.0;
        HeightField f = generate_shape(s, {40.0, 40.0, 80, 80});
        CHECK(field_min(f) >= 0.0);
        CHECK(field_max(f) <= s.max_depth_um);
    }
}

TEST_CASE("resolution consistency under 2x2 downsampling") {
    WorkingArea coarse_area = die_area();
    WorkingArea fine_area{250.0, 250.0, 1000, 1000};
    const double pc = coarse_area.pitch_x(); // 0.5 um

    SECTION("ramp: averaging is exact up to roundoff") {
        ShapeSpec s;
        HeightField coarse = generate_shape(s, coarse_area);
        HeightField avg = downsample_2x2(generate_shape(s, fine_area));
        for (std::size_t k = 0; k < coarse.removal.size(); ++k)
            CHECK(std::abs(avg.removal[k] - coarse.removal[k]) <= 1e-12);
    }

    SECTION("sinusoid: within the Lipschitz bound") {
        ShapeSpec s;
        s.kind = ShapeKind::sinusoid;
        HeightField coarse = generate_shape(s, coarse_area);
        HeightField avg = downsample_2x2(generate_shape(s, fine_area));
        double lip = 7.5 * 2.0 * std::numbers::pi * 0.01; // amp * tau * freq
        for (std::size_t k = 0; k < coarse.removal.size(); ++k)
            CHECK(std::abs(avg.removal[k] - coarse.removal[k]) <= lip * pc + 1e-9);
    }

    SECTION("lens: within the local Lipschitz bound away from the rim") {
        // the cap gradient diverges at the rim, so compare only pixels whose
        // 2x2 block stays well inside one lens and bound each error locally
        WorkingArea ca{60.0, 60.0, 120, 120};
        WorkingArea fa{60.0, 60.0, 240, 240};
        ShapeSpec s;
        s.kind = ShapeKind::lens_array;
        s.width_um = s.height_um = 60.0;
        const double r = 15.0, sag = 15.0;
        HeightField coarse = generate_shape(s, ca);
        HeightField avg = downsample_2x2(generate_shape(s, fa));
        int kept = 0;
        for (int i = 0; i < 120; ++i)
            for (int j = 0; j < 120; ++j) {
                double u = (j + 0.5) * 0.5, v = (i + 0.5) * 0.5;
                double cu = (std::floor(u / 30.0) + 0.5) * 30.0;
                double cv = (std::floor(v / 30.0) + 0.5) * 30.0;
                double dist = std::hypot(u - cu, v - cv);
                if (dist > r - 2.0 * pc) continue;
                double reach = dist + pc;
                double lip = (sag / r) * reach / std::sqrt(r * r - reach * reach);
                CHECK(std::abs(avg.at(i, j) - coarse.at(i, j)) <= lip * pc + 1e-9);
                ++kept;
            }
        CHECK(kept > 1000);
    }
}

TEST_CASE("shape parameter validation") {
    WorkingArea area{50.0, 50.0, 100, 100};
    ShapeSpec s;
    s.width_um = s.height_um = 50.0;

    s.width_um = 0.0;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    s.width_um = 50.0;

    s.max_depth_um = 0.0;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    s.max_depth_um = 15.0;

    s.kind = ShapeKind::stairs;
    s.n_steps = 0;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    s.n_steps = 5;

    s.kind = ShapeKind::sinusoid;
    s.freq_x_per_um = -0.01;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    s.freq_x_per_um = 0.01;

    s.kind = ShapeKind::lens_array;
    s.lens_diameter_um = 0.0;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
    s.lens_diameter_um = 30.0;

    s.kind = ShapeKind::cone;
    s.base_size_um = -1.0;
    CHECK_THROWS_AS(generate_shape(s, area), ValidationError);
}
