#include <doctest.h>

#include <fstream>
#include <sstream>

#include "retq/config_io.hpp"
#include "retq/report.hpp"

using namespace retq;

namespace {

std::string fixture(const char* name) {
  return std::string(RETQ_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("every bundled fixture loads and validates") {
  for (const char* name : {"normal_s5.json", "small_s2.json", "small_s3.json",
                           "table2_s2.json", "degenerate_mms.json"}) {
    RunSpec spec = load_config(fixture(name));
    CHECK_NOTHROW(spec.model.validate());
    CHECK(!spec.config_hash.empty());
    CHECK(spec.config_hash == fnv1a_hex(slurp(fixture(name))));
  }
}

TEST_CASE("parse errors carry the JSON path of the offending entry") {
  std::string base = slurp(fixture("small_s2.json"));

  // malformed JSON
  CHECK_THROWS(parse_config("{ not json", "inline"));

  // structurally valid JSON with a bad model entry
  auto expect_mention = [&](const std::string& text, const std::string& needle) {
    try {
      parse_config(text, "inline");
      FAIL_CHECK("expected a parse failure mentioning " << needle);
    } catch (const std::exception& ex) {
      CHECK(std::string(ex.what()).find(needle) != std::string::npos);
    }
  };
  std::string bad = base;
  auto replace_once = [](std::string s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  expect_mention(replace_once(base, "\"channels\": 2", "\"channels\": 0"), "channels");
  expect_mention(replace_once(base, "\"retrial\"", "\"retrail\""), "retrial");
}

TEST_CASE("named parameter transformations rescale what they name") {
  RunSpec spec = load_config(fixture("small_s2.json"));
  ModelConfig cfg = spec.model;

  // rescaling a correlated MAP shifts its phase distribution a little, so
  // the realized rate only approximates the target; the class matrix itself
  // scales exactly and the generator stays conservative (checked by validate)
  const double lh0 = arrival_rate(cfg.arrivals, 0);
  apply_parameter(cfg, "lambda_h", 0.33);
  CHECK((cfg.arrivals.classes[0] - (0.33 / lh0) * spec.model.arrivals.classes[0])
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(arrival_rate(cfg.arrivals, 0) == doctest::Approx(0.33).epsilon(0.02));
  CHECK((cfg.arrivals.classes[1] - spec.model.arrivals.classes[1]).cwiseAbs().maxCoeff() ==
        0.0);

  // on a single-phase model the rescaling is exact
  RunSpec flat = load_config(fixture("table2_s2.json"));
  ModelConfig one = flat.model;
  apply_parameter(one, "lambda_h", 0.37);
  CHECK(arrival_rate(one.arrivals, 0) == doctest::Approx(0.37).epsilon(1e-12));

  apply_parameter(cfg, "mu_n", 0.8);
  CHECK(cfg.service[1].rate() == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(cfg.service[1].order() == spec.model.service[1].order());

  apply_parameter(cfg, "theta", 3.0);
  CHECK(cfg.retrial.mean() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  apply_parameter(cfg, "catastrophe_rate", 0.25);
  CHECK(total_event_rate(cfg.catastrophe) == doctest::Approx(0.25).epsilon(1e-10));

  apply_parameter(cfg, "channels", 3);
  CHECK(cfg.channels == 3);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS(apply_parameter(cfg, "no_such_parameter", 1.0));
}

TEST_CASE("the config hash is a stable FNV-1a digest") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("hello") == fnv1a_hex("hello"));
  CHECK(fnv1a_hex("hello") != fnv1a_hex("hellp"));
}

TEST_CASE("reports serialize to parsable JSON and CSV") {
  RunSpec spec = load_config(fixture("degenerate_mms.json"));
  StationaryDistribution z = solve_new(spec.model, spec.solver);
  MeasureReport m = compute_measures(spec.model, z);
  RunMeta meta{spec.config_hash, 1};

  std::string j = to_json(m, z.stats, meta);
  CHECK(j.find(spec.config_hash) != std::string::npos);
  CHECK(j.find("e_orbit") != std::string::npos);

  SimConfig sim = spec.sim;
  sim.model = spec.model;
  sim.events = 50000;
  SimEstimate e = simulate(sim);
  std::string csv = agreement_csv(m, e);
  // header plus at least the scalar measures
  CHECK(std::count(csv.begin(), csv.end(), '\n') > 5);
  CHECK(csv.find("measure") != std::string::npos);
}
