#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "qdm/dataset_io.hpp"
#include "qdm/error.hpp"
#include "qdm/kv_file.hpp"
#include "qdm/run_config.hpp"

namespace {

qdm::KeyValueFile parse(const std::string& text) {
  std::istringstream in(text);
  return qdm::parse_key_values(in, "cfg");
}

qdm::Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  return qdm::read_dataset_csv(in, "data.csv");
}

std::string error_message(const std::function<void()>& fn, qdm::ErrorCode expected) {
  try {
    fn();
  } catch (const qdm::Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("no error thrown");
  return {};
}

}  // namespace

TEST_CASE("key/value text") {
  const qdm::KeyValueFile kv = parse("# header\n\nseed = 5\n  scatter.f=4.5   # trailing\nname = a b\n");
  REQUIRE(kv.entries.size() == 3);
  CHECK(*kv.find("seed") == "5");
  CHECK(*kv.find("scatter.f") == "4.5");
  CHECK(*kv.find("name") == "a b");
  CHECK(kv.find("missing") == nullptr);

  const std::string dup = error_message([] { parse("a = 1\nb = 2\na = 3\n"); }, qdm::ErrorCode::Parse);
  CHECK(dup.find(":3:") != std::string::npos);
  error_message([] { parse("just words\n"); }, qdm::ErrorCode::Parse);
  error_message([] { parse(" = 4\n"); }, qdm::ErrorCode::Parse);

  std::ostringstream out;
  qdm::write_key_values(out, kv, "note");
  const qdm::KeyValueFile back = parse(out.str());
  CHECK(back.entries == kv.entries);
}

TEST_CASE("number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1064e-9, -2.5e300, 20161026.0}) {
    CHECK(std::stod(qdm::format_exact(v)) == v);
  }
  CHECK(qdm::format_general(1.58107234, 4) == "1.581");
}

TEST_CASE("dataset CSV round trip") {
  const double fs = 16384.0;
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(1000, -3.0, 3.0);
  Eigen::VectorXd b = a.array().sin().matrix() * 1e-3;
  const qdm::Dataset d{qdm::TimeSeries(fs, a), qdm::TimeSeries(fs, b)};
  std::ostringstream out;
  qdm::write_dataset_csv(out, d);
  const std::string text = out.str();
  CHECK(text.rfind("t,bhd1,bhd2\n0.000000000,", 0) == 0);

  const qdm::Dataset back = parse_csv(text);
  CHECK(back.bhd1.sample_rate() == fs);
  CHECK(back.bhd1.size() == 1000);
  CHECK(((back.bhd1.samples() - a).array().abs() <= 1e-8 * a.array().abs().max(1e-300)).all());
  CHECK((back.bhd2.samples() - b).cwiseAbs().maxCoeff() < 1e-11);

  std::ostringstream again;
  qdm::write_dataset_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("dataset CSV errors name the row") {
  const std::string good = "t,bhd1,bhd2\n0.0,1,2\n0.5,1,2\n1.0,1,2\n";
  CHECK(parse_csv(good).bhd1.sample_rate() == 2.0);

  const std::string truncated = "t,bhd1,bhd2\n0.0,1,2\n0.5,1\n1.0,1,2\n";
  CHECK(error_message([&] { parse_csv(truncated); }, qdm::ErrorCode::Parse).find("row 3") != std::string::npos);

  const std::string nan_row = "t,bhd1,bhd2\n0.0,1,2\n0.5,nan,2\n1.0,1,2\n";
  const std::string msg = error_message([&] { parse_csv(nan_row); }, qdm::ErrorCode::Parse);
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("bhd1") != std::string::npos);

  error_message([] { parse_csv("time,x,y\n0,1,2\n1,1,2\n"); }, qdm::ErrorCode::Parse);
  error_message([] { parse_csv("t,bhd1,bhd2\n0,1,2\n"); }, qdm::ErrorCode::Parse);
  error_message([] { parse_csv("t,bhd1,bhd2\n0,1,2\n0.5,1,2\n1.5,1,2\n"); }, qdm::ErrorCode::Parse);
  error_message([] { parse_csv("t,bhd1,bhd2\n0,1,2\n0.5,x,2\n"); }, qdm::ErrorCode::Parse);
  error_message([] { qdm::read_dataset_csv(std::filesystem::path("/nonexistent/data.csv")); }, qdm::ErrorCode::Io);
}

TEST_CASE("run configuration") {
  SUBCASE("defaults") {
    const qdm::RunConfig cfg = qdm::parse_run_config({});
    CHECK(cfg.sim.sample_rate == 16384.0);
    CHECK(cfg.sim.duration == 5.0);
    CHECK(cfg.sim.noise.seed == 20161026u);
    CHECK(cfg.sim.scatter.frequency == 5.0);
    CHECK(cfg.sim.scatter.depth[0] == doctest::Approx(3 * 1064e-9));
    CHECK(cfg.sim.marker_frequency == 1000.0);
    CHECK(cfg.sim.noise.bhd2.squeezing_db() == doctest::Approx(5.0));
    CHECK(cfg.spectral.segment_length == 4096);
  }
  SUBCASE("overrides") {
    const qdm::RunConfig cfg = qdm::parse_run_config(
        parse("seed = 7\nscatter.f = 4\nscatter.lambda = 1.55e-6\nnoise.bhd2.squeezing_db = 3\nfit.fix_f = true\n"
              "spectral.window = rectangular\nduration = 4\noutput.dir = elsewhere\n"));
    CHECK(cfg.sim.noise.seed == 7u);
    CHECK(cfg.sim.scatter.frequency == 4.0);
    CHECK(cfg.fit.wavelength == 1.55e-6);
    CHECK(cfg.sim.noise.bhd2.squeezing_db() == doctest::Approx(3.0));
    CHECK(cfg.fit.fix_f);
    CHECK(cfg.spectral.window == qdm::Window::Rectangular);
    CHECK(cfg.sim.chirp.duration == 4.0);
    CHECK(cfg.output_dir == "elsewhere");
  }
  SUBCASE("every problem is listed") {
    const std::string msg = error_message(
        [] { qdm::parse_run_config(parse("bogus = 1\nscatter.f = abc\nnoise.bhd1.eta = 2\n")); },
        qdm::ErrorCode::Config);
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("scatter.f") != std::string::npos);
    CHECK(msg.find("noise.bhd1.eta") != std::string::npos);
  }
  SUBCASE("zero duration names the key") {
    const std::string msg =
        error_message([] { qdm::parse_run_config(parse("duration = 0\n")); }, qdm::ErrorCode::Config);
    CHECK(msg.find("duration") != std::string::npos);
  }
  SUBCASE("serialized config parses back to itself") {
    const qdm::RunConfig cfg = qdm::parse_run_config(parse("seed = 99\nscatter.m2 = 1e-8\nfit.multistart_count = 6\n"));
    const qdm::KeyValueFile kv = qdm::to_key_values(cfg);
    const qdm::RunConfig back = qdm::parse_run_config(kv);
    CHECK(qdm::to_key_values(back).entries == kv.entries);
  }
}
