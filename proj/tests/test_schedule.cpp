#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fregrad/schedule.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace fregrad;
using namespace fregrad::schedule;

TEST_CASE("linear_beta endpoints and interpolation") {
  CHECK(linear_beta(1, 0.5, 0.5) == Vector{{0.5}});
  const Vector two = linear_beta(2, 0.1, 0.3);
  CHECK(two[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(0.3).epsilon(1e-15));

  const Vector b = linear_beta(50, 1e-4, 0.05);
  CHECK(b[0] == 1e-4);
  CHECK(b[49] == doctest::Approx(0.05).epsilon(1e-15));
  const double b25 = 1e-4 + (0.05 - 1e-4) * 24.0 / 49.0;
  CHECK(b[24] == doctest::Approx(b25).epsilon(1e-14));
}

TEST_CASE("linear_beta rejects bad arguments") {
  CHECK_THROWS_AS(linear_beta(0, 0.1, 0.2), InvalidArgument);
  CHECK_THROWS_AS(linear_beta(5, 0.0, 0.2), InvalidArgument);
  CHECK_THROWS_AS(linear_beta(5, 0.1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(linear_beta(5, 0.3, 0.2), InvalidArgument);
}

TEST_CASE("gamma_from_beta small cases") {
  CHECK(gamma_from_beta(Vector{{0.5}})[0] == 0.5);
  const Vector g = gamma_from_beta(Vector{{0.1, 0.1}});
  CHECK(g[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(0.81).epsilon(1e-15));
}

TEST_CASE("gamma matches an extended-precision product") {
  const Vector b = linear_beta(50, 1e-4, 0.05);
  std::vector<long double> lb;
  for (int i = 0; i < 50; ++i) lb.push_back(1e-4L + (0.05L - 1e-4L) * i / 49.0L);
  const auto ref = oracle::gamma_product(lb);
  const Vector g = gamma_from_beta(b);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::abs(static_cast<long double>(g[i]) - ref[i]) / ref[i] < 1e-12L);
    if (i > 0) CHECK(g[i] < g[i - 1]);
  }
}

TEST_CASE("rescale_zero_snr worked example and fixed point") {
  const Vector r = rescale_zero_snr(Vector{{0.81, 0.25}}, 1e-4);
  CHECK(r[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(0.9 * 0.0001 / (0.9 - 0.5 + 0.0001)).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(2.2494e-4).epsilon(1e-4));
}

TEST_CASE("rescale_zero_snr guards") {
  CHECK_THROWS_AS(rescale_zero_snr(Vector{{0.8, 0.9}}, 1e-4), InvalidArgument);
  CHECK_THROWS_WITH_AS(rescale_zero_snr(Vector{{0.9, 0.8}}, 0.0), doctest::Contains("division by zero"),
                       InvalidArgument);
}

TEST_CASE("snr examples and monotonicity") {
  CHECK(snr(Vector{{0.5}})[0] == 1.0);
  CHECK(snr(Vector{{0.81}})[0] == doctest::Approx(4.2632).epsilon(1e-4));
  CHECK_THROWS_AS(snr(Vector{{1.0}}), InvalidArgument);
  const Vector s = snr(gamma_from_beta(linear_beta(50, 1e-4, 0.05)));
  for (int i = 1; i < 50; ++i) CHECK(s[i] < s[i - 1]);
}

TEST_CASE("default schedule invariants") {
  const NoiseSchedule s;
  const Vector& g = s.gamma();
  const Vector& r = s.sqrt_gamma_rescaled();
  CHECK(std::abs(r[0] - std::sqrt(g[0])) < 1e-12);
  for (int i = 1; i < 50; ++i) CHECK(r[i] < r[i - 1]);
  const double s1 = std::sqrt(g[0]), sT = std::sqrt(g[49]);
  CHECK(r[49] > 0);
  CHECK(r[49] <= 1e-4 * (1 + 1e-6) / (s1 - sT + 1e-4) * s1);
  CHECK(r[49] == doctest::Approx(1e-4 * s1 / (s1 - sT + 1e-4)).epsilon(1e-10));

  const double before = g[49] / (1 - g[49]);
  const double after = r[49] * r[49] / (1 - r[49] * r[49]);
  CHECK(before > 1e-4);
  CHECK(after < 1e-6);
}

TEST_CASE("effective beta is consistent with the rescaled gamma") {
  const NoiseSchedule s;
  for (int t = 1; t <= 50; ++t) {
    CHECK(s.gamma_at(t) == doctest::Approx(s.sqrt_gamma_rescaled()[t - 1] * s.sqrt_gamma_rescaled()[t - 1]));
    CHECK(1 - s.beta_at(t) == doctest::Approx(s.gamma_at(t) / s.gamma_prev(t)).epsilon(1e-12));
  }
  CHECK(s.gamma_prev(1) == 1.0);
  CHECK_THROWS_AS(s.gamma_at(0), InvalidArgument);
  CHECK_THROWS_AS(s.gamma_at(51), InvalidArgument);
}

TEST_CASE("without zero_snr the raw schedule is used bit-exactly") {
  ScheduleConfig cfg;
  cfg.zero_snr = false;
  const NoiseSchedule s(cfg);
  CHECK(s.effective_gamma() == s.gamma());
  CHECK(s.effective_beta() == s.beta());
  CHECK(s.gamma() == gamma_from_beta(linear_beta(50, 1e-4, 0.05)));
}

TEST_CASE("schedule CSV columns") {
  std::ostringstream out;
  NoiseSchedule(ScheduleConfig{}).write_csv(out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,beta,gamma,sqrt_gamma_rescaled,snr,snr_rescaled,log10_snr,log10_snr_rescaled");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 50);

  std::ostringstream one;
  ScheduleConfig single;
  single.steps = 1;
  NoiseSchedule(single).write_csv(one);
  const std::string text = one.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("rescaling again only nudges the terminal SNR") {
  const NoiseSchedule s;
  const Vector once = s.sqrt_gamma_rescaled();
  const Vector twice = rescale_zero_snr(once.cwiseAbs2(), 1e-4);
  const auto tsnr = [](double r) { return r * r / (1 - r * r); };
  CHECK(std::abs(tsnr(twice[49]) - tsnr(once[49])) < tsnr(once[49]));
}
