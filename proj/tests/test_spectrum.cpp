#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "oracle_values.hpp"
#include "warp_harmonic/error.hpp"
#include "warp_harmonic/spectrum.hpp"

using namespace warp_harmonic;

TEST_SUITE("spectrum") {

TEST_CASE("critical points agree with the independent root oracle") {
  const auto roots = critical_points(5, 512);
  REQUIRE(roots.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(roots[k].k == k + 1);
    CHECK(roots[k].approx == doctest::Approx(oracle::kRootT[k]).epsilon(1e-15));
    CHECK(roots[k].residual_log10 < residual_bound_log10(512));
  }
  // 37 significant digits of t_1; the library prints d.ddd...e-01
  const std::string digits = "3." + std::string(oracle::kRootT1).substr(3, 36);
  CHECK(roots[0].value.rfind(digits, 0) == 0);
  CHECK(roots[0].value.find("e-01") != std::string::npos);
}

TEST_CASE("required bits") {
  CHECK(required_bits(0.5) == static_cast<long>(std::ceil(4.0 / std::log(2.0))) + 64);
  CHECK(required_bits(oracle::kRootT[4]) > required_bits(oracle::kRootT[0]));
  CHECK(required_bits(0.1, 0.05) < required_bits(0.1, 1.0));
}

TEST_CASE("gaps match the oracle in log10 and decrease") {
  const SpectrumTable t = accumulation_report(5, 1.0, 512);
  CHECK(t.verified);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[0].energy.gap_approx == doctest::Approx(oracle::kGap1).epsilon(1e-12));
  for (int k = 0; k < 5; ++k) {
    CHECK(t.rows[k].energy.gap_log10 == doctest::Approx(oracle::kGapLog10[k]).epsilon(1e-12));
    CHECK(t.rows[k].tk_k_pi == doctest::Approx(oracle::kTkKPi[k]).epsilon(1e-14));
    if (k > 0) CHECK(t.rows[k].energy.gap_log10 < t.rows[k - 1].energy.gap_log10);
  }
  CHECK(t.rows[0].energy.psi_sign == -1);
}

TEST_CASE("insufficient precision names the required bits") {
  const auto roots = critical_points(5, 512);
  try {
    (void)energy_of_root(roots[4], 64);
    FAIL("expected PrecisionError");
  } catch (const PrecisionError& e) {
    CHECK(e.required_bits() == required_bits(roots[4].approx));
    CHECK(std::string(e.what()).find(std::to_string(e.required_bits())) != std::string::npos);
  }
  CHECK_THROWS_AS(accumulation_report(5, 1.0, 64), PrecisionError);
  CHECK_THROWS_AS(critical_points(0, 512), ConfigError);
}

TEST_CASE("beta = 0.05 roots and gaps") {
  const SpectrumTable t = accumulation_report(3, 0.05, 256);
  REQUIRE(t.rows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(t.rows[k].root.approx == doctest::Approx(oracle::kBeta005T[k]).epsilon(1e-14));
    CHECK(t.rows[k].energy.gap_approx == doctest::Approx(oracle::kBeta005Gap[k]).epsilon(1e-12));
  }
}

TEST_CASE("CSV carries decimal strings and the table prints") {
  const SpectrumTable t = accumulation_report(2, 1.0, 256);
  std::stringstream csv;
  t.write_csv(csv);
  const std::string s = csv.str();
  CHECK(s.find("3.0373810289305059113") != std::string::npos);
  CHECK(s.find("e-") != std::string::npos);
  std::stringstream table;
  t.print(table);
  CHECK(table.str().find("k") != std::string::npos);
  CHECK(t.to_json()["rows"].size() == 2);
}

TEST_CASE("identity at f = t_1 solves the f equation") {
  const HarmonicRootReport r = verify_harmonic_root(oracle::kRootT[0], 1.0, {3, 4});
  REQUIRE(r.levels.size() == 2);
  CHECK(r.separation_ok);
  CHECK((r.refinement_ok || r.at_floor));
  CHECK(r.levels[1].energy ==
        doctest::Approx(oracle::kIdentityEnergySpectrumT1).epsilon(5e-3));
}

}  // TEST_SUITE
