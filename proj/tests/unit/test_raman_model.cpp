#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ramanpd/error.hpp"
#include "ramanpd/raman_model.hpp"
#include "ramanpd/units.hpp"

using namespace rpd;

TEST_CASE("pump wavelengths convert to frequency") {
  // c / lambda evaluated independently.
  CHECK(wavelength_to_frequency(1366.0) == doctest::Approx(219.46739238653).epsilon(1e-12));
  CHECK(wavelength_to_frequency(1425.0) == doctest::Approx(210.38067228070173).epsilon(1e-12));
  CHECK(wavelength_to_frequency(1455.0) == doctest::Approx(206.04292646048108).epsilon(1e-12));
  CHECK(wavelength_to_frequency(1475.0) == doctest::Approx(203.2491240677966).epsilon(1e-12));
  CHECK_THROWS_AS(wavelength_to_frequency(0.0), Error);
}

TEST_CASE("unit conversions") {
  CHECK(db_to_neper(0.2) == doctest::Approx(0.2 * std::log(10.0) / 10.0));
  CHECK(mw_to_dbm(1.0) == 0.0);
  CHECK(mw_to_dbm(100.0) == doctest::Approx(20.0));
  CHECK(std::isinf(mw_to_dbm(0.0)));
  CHECK(dbm_to_mw(-16.0) == doctest::Approx(0.025118864315095794));
}

TEST_CASE("triangular gain shape") {
  const FiberSpec f;
  CHECK(raman_gain(0.0, f) == 0.0);
  CHECK(raman_gain(-1.0, f) == 0.0);
  CHECK(raman_gain(13.2, f) == doctest::Approx(0.4125));
  CHECK(raman_gain(6.6, f) == doctest::Approx(0.4125 / 2));
  CHECK(raman_gain(14.1, f) == doctest::Approx(0.4125 / 2));
  CHECK(raman_gain(15.0, f) == doctest::Approx(0.0));
  CHECK(raman_gain(15.5, f) == 0.0);
  // 1455 nm pump against 193.4 THz, used by the undepleted-pump oracle.
  CHECK(raman_gain(12.642926460481078, f) == doctest::Approx(0.3950914518900337).epsilon(1e-12));

  // Continuity and non-negativity on a fine sweep.
  double prev = raman_gain(0.0, f);
  for (int k = 1; k <= 2000; ++k) {
    const double g = raman_gain(k * 0.01, f);
    CHECK(g >= 0.0);
    CHECK(std::abs(g - prev) <= 0.4125 / 1.8 * 0.01 + 1e-12);
    prev = g;
  }
}

TEST_CASE("tabulated gain interpolates linearly and is zero outside") {
  const auto g = RamanGainProfile::tabulated({{0.0, 0.0}, {10.0, 0.5}, {20.0, 0.1}});
  CHECK(g.efficiency(5.0) == doctest::Approx(0.25));
  CHECK(g.efficiency(15.0) == doctest::Approx(0.3));
  CHECK(g.efficiency(25.0) == 0.0);
  CHECK(g.efficiency(-1.0) == 0.0);

  const auto path = std::filesystem::temp_directory_path() / "rpd_gain_table.txt";
  {
    std::ofstream out(path);
    out << "# shift efficiency\n0 0\n13.2 0.4125\n15 0\n";
  }
  const auto loaded = RamanGainProfile::load_table(path);
  CHECK(loaded.efficiency(6.6) == doctest::Approx(0.20625));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(RamanGainProfile::load_table("/nonexistent/gain.txt"), Error);
}

TEST_CASE("standard wave set layout") {
  const FiberSpec f;
  const WaveSet w = WaveSet::standard(f);
  REQUIRE(w.size() == 48);
  CHECK(w.is_standard());
  CHECK(w.signal_indices().size() == 40);
  CHECK(w.pump_indices().size() == 8);
  CHECK(w[0].frequency_thz == doctest::Approx(192.0));
  CHECK(w[39].frequency_thz == doctest::Approx(195.9));
  for (std::size_t i = 0; i < 4; ++i) CHECK(w[40 + i].direction == Direction::forward);
  for (std::size_t i = 4; i < 8; ++i) CHECK(w[40 + i].direction == Direction::backward);
  CHECK(w[40].attenuation_per_km == doctest::Approx(db_to_neper(0.32)));
  CHECK(w[40].role == WaveRole::pump_second_order);
  CHECK(w[41].attenuation_per_km == doctest::Approx(db_to_neper(0.25)));
  CHECK(w[0].attenuation_per_km == doctest::Approx(db_to_neper(0.2)));
}

TEST_CASE("pump table ranges") {
  const auto& t = standard_pumps();
  CHECK(t[0].min_mw == 200.0);
  CHECK(t[0].max_mw == 1200.0);
  CHECK(t[4].min_mw == 200.0);
  CHECK(t[4].max_mw == 1200.0);
  for (std::size_t i : {1, 2, 3, 5, 6, 7}) {
    CHECK(t[i].min_mw == 5.0);
    CHECK(t[i].max_mw == 150.0);
  }
  PumpConfig p{{430, 45, 98, 12, 1150, 8, 12, 24}};
  CHECK(p.within_ranges());
  p.powers_mw[0] = 1300;
  CHECK_FALSE(p.within_ranges());
  p.powers_mw[0] = -1;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("coupling matrix signs and photon ratio") {
  const FiberSpec f;
  const WaveSet w = WaveSet::standard(f);
  const CouplingMatrix c(w, RamanGainProfile::triangular(f.raman_peak_efficiency));
  // 1455 nm pump (index 42) and channel 14 (193.4 THz).
  const double fp = w[42].frequency_thz, fs = w[14].frequency_thz;
  CHECK(c(14, 42) == doctest::Approx(raman_gain(fp - fs, f)));
  CHECK(c(42, 14) == doctest::Approx(-(fp / fs) * raman_gain(fp - fs, f)));
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(c(i, i) == 0.0);
  // Signals are all within 3.9 THz of each other and couple weakly but non-trivially.
  CHECK(c(0, 39) > 0.0);
  CHECK(c(39, 0) < 0.0);
}

TEST_CASE("coupled rhs reduces to attenuation when gain is zero") {
  const WaveSet w({testing::signal_wave(193.0), testing::signal_wave(210.0)});  // 17 THz apart
  const auto g = RamanGainProfile::triangular(0.4125);
  const std::vector<double> p{1e-3, 2e-3};
  const auto d = coupled_rhs(0.0, p, w, g);
  CHECK(d[0] == doctest::Approx(-db_to_neper(0.2) * 1e-3));
  CHECK(d[1] == doctest::Approx(-db_to_neper(0.2) * 2e-3));
  const std::vector<double> bad{-1e-3, 1e-3};
  CHECK_THROWS_AS(coupled_rhs(0.0, bad, w, g), Error);
}

TEST_CASE("fiber spec validation") {
  FiberSpec f;
  CHECK_NOTHROW(f.validate());
  f.span_length_km = 0.0;
  CHECK_THROWS_AS(f.validate(), Error);
}
