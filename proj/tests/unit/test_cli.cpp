// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>

#include "blalab/io.hpp"
#include "blalab_cli/cli.hpp"
#include "oracles.hpp"

using namespace blalab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string p(const fs::path& path) { return path.string(); }

std::size_t data_rows(const fs::path& csv) {
  const auto text = io::read_text(csv);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  return lines - 1;
}

}  // namespace

TEST_CASE("full-grid record gives one FRF row per in-band bin") {
  const auto dir = oracle::scratch_dir("cli_full");
  REQUIRE(run({"design", "--grid", "full", "--seed", "3", "--out", p(dir / "spec.json")}).code == cli::kExitOk);
  REQUIRE(run({"simulate", "--spec", p(dir / "spec.json"), "--periods", "1", "--noise", "0.001", "--out",
               p(dir / "rec.csv")}).code == cli::kExitOk);
  const auto est = run({"estimate", "--in", p(dir / "rec.csv"), "--R", "2", "--n", "3", "--band", "1:5", "--frame",
                        "record", "--out", p(dir / "frf.csv")});
  REQUIRE(est.code == cli::kExitOk);
  CHECK(data_rows(dir / "frf.csv") == 401);
  CHECK(fs::exists(dir / "frf.csv.provenance.json"));
  CHECK(fs::exists(dir / "frf.meta.json"));

  const auto plot = run({"plot", "--frf", p(dir / "frf.csv"), "--out", p(dir / "frf.svg")});
  REQUIRE(plot.code == cli::kExitOk);
  const auto svg = io::read_text(dir / "frf.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("Magnitude (dB)") != std::string::npos);
  CHECK(fs::exists(dir / "frf.data.csv"));
  CHECK(data_rows(dir / "frf.csv") == 401);
}

TEST_CASE("provenance records argv and no clock") {
  const auto dir = oracle::scratch_dir("cli_prov");
  const std::vector<std::string> args{"design", "--seed", "5", "--out", p(dir / "spec.json")};
  REQUIRE(run(args).code == cli::kExitOk);
  const auto j = nlohmann::json::parse(io::read_text(dir / "spec.json.provenance.json"));
  CHECK(j.at("subcommand") == "design");
  CHECK(j.at("argv").get<std::vector<std::string>>() == args);
  CHECK(j.at("seed") == 5);
  const auto text = io::read_text(dir / "spec.json.provenance.json");
  CHECK(text.find("time") == std::string::npos);
  CHECK(text.find("date") == std::string::npos);
}

TEST_CASE("too small concatenation window exits with a configuration error") {
  const auto dir = oracle::scratch_dir("cli_concat");
  REQUIRE(run({"design", "--grid", "full", "--out", p(dir / "spec.json")}).code == cli::kExitOk);
  REQUIRE(run({"simulate", "--spec", p(dir / "spec.json"), "--manifest", p(dir / "manifest.json"), "--records", "2",
               "--periods", "1", "--initial-state-std", "1"}).code == cli::kExitOk);
  const auto bad = run({"estimate-concat", "--manifest", p(dir / "manifest.json"), "--R", "2", "--n", "3"});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.find("2n+1 >= (R+1)(1+N_c)") != std::string::npos);
  const auto good = run({"estimate-concat", "--manifest", p(dir / "manifest.json"), "--out", p(dir / "cat.csv")});
  CHECK(good.code == cli::kExitOk);
  CHECK(data_rows(dir / "cat.csv") == 801);
}

TEST_CASE("malformed input files exit with a configuration error naming the line") {
  const auto dir = oracle::scratch_dir("cli_bad");
  REQUIRE(run({"design", "--grid", "full", "--N", "500", "--band", "1:10", "--out", p(dir / "spec.json")}).code ==
          cli::kExitOk);
  REQUIRE(run({"simulate", "--spec", p(dir / "spec.json"), "--periods", "2", "--out", p(dir / "rec.csv")}).code ==
          cli::kExitOk);
  auto text = io::read_text(dir / "rec.csv");
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = text.find('\n', pos) + 1;
  text.replace(pos, text.find('\n', pos) - pos, "0.06,oops,1");
  io::write_text(dir / "bad.csv", text);
  fs::copy_file(dir / "rec.meta.json", dir / "bad.meta.json");
  const auto r = run({"estimate", "--in", p(dir / "bad.csv"), "--band", "1:10"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("bad.csv:4") != std::string::npos);

  // Length disagrees with the metadata.
  auto meta = nlohmann::json::parse(io::read_text(dir / "rec.meta.json"));
  meta["n_periods"] = 3;
  io::write_text(dir / "rec.meta.json", meta.dump());
  CHECK(run({"estimate", "--in", p(dir / "rec.csv"), "--band", "1:10"}).code == cli::kExitConfig);
}

TEST_CASE("unexcited windows exit with a numerical error") {
  const auto dir = oracle::scratch_dir("cli_numerical");
  REQUIRE(run({"design", "--grid", "odd", "--out", p(dir / "spec.json")}).code == cli::kExitOk);
  REQUIRE(run({"simulate", "--spec", p(dir / "spec.json"), "--periods", "2", "--out", p(dir / "rec.csv")}).code ==
          cli::kExitOk);
  CHECK(run({"estimate", "--in", p(dir / "rec.csv"), "--R", "2", "--n", "3", "--out", p(dir / "plain.csv")}).code == cli::kExitOk);
  const auto with_spec =
      run({"estimate", "--in", p(dir / "rec.csv"), "--spec", p(dir / "spec.json"), "--out", p(dir / "frf.csv")});
  CHECK(with_spec.code == cli::kExitOk);
  CHECK(data_rows(dir / "frf.csv") == 200);

  SignalRecord zero;
  zero.samples.assign(5000, 0.0);
  zero.samples_per_period = 5000;
  io::write_record(dir / "zero.csv", zero, zero);
  const auto r = run({"estimate", "--in", p(dir / "zero.csv")});
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("unexcited window") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({"frobnicate"}).code == cli::kExitConfig);
  CHECK(run({"estimate"}).code == cli::kExitConfig);
  CHECK(run({"design", "--band", "5"}).code == cli::kExitConfig);
  CHECK(run({"bench", "run", "--id", "nope"}).code == cli::kExitConfig);
  CHECK(run({"estimate", "--in", "/nonexistent/rec.csv"}).code == cli::kExitConfig);
}

TEST_CASE("the seed environment variable overrides the flag") {
  const auto dir = oracle::scratch_dir("cli_seed");
  REQUIRE(run({"design", "--seed", "1", "--out", p(dir / "a.json")}).code == cli::kExitOk);
  ::setenv("BLALAB_SEED", "77", 1);
  const auto code = run({"design", "--seed", "1", "--out", p(dir / "b.json")}).code;
  ::setenv("BLALAB_SEED", "junk", 1);
  const auto junk = run({"design", "--out", p(dir / "c.json")}).code;
  ::unsetenv("BLALAB_SEED");
  REQUIRE(code == cli::kExitOk);
  CHECK(junk == cli::kExitConfig);
  CHECK(io::read_spec(dir / "b.json").seed == 77);
  CHECK(io::read_spec(dir / "a.json").seed == 1);
  REQUIRE(run({"design", "--seed", "77", "--out", p(dir / "d.json")}).code == cli::kExitOk);
  CHECK(io::read_text(dir / "b.json") == io::read_text(dir / "d.json"));
}

TEST_CASE("averaging, fitting and comparing") {
  const auto dir = oracle::scratch_dir("cli_pipeline");
  REQUIRE(run({"design", "--out", p(dir / "spec.json")}).code == cli::kExitOk);
  std::vector<std::string> frfs;
  for (int i = 0; i < 3; ++i) {
    const auto rec = p(dir / ("rec" + std::to_string(i) + ".csv"));
    const auto frf = p(dir / ("frf" + std::to_string(i) + ".csv"));
    REQUIRE(run({"simulate", "--spec", p(dir / "spec.json"), "--noise", "0.001", "--seed", std::to_string(i), "--out",
                 rec}).code == cli::kExitOk);
    REQUIRE(run({"estimate", "--in", rec, "--spec", p(dir / "spec.json"), "--out", frf}).code == cli::kExitOk);
    frfs.push_back(frf);
  }
  std::vector<std::string> avg{"average"};
  for (const auto& f : frfs) {
    avg.push_back("--in");
    avg.push_back(f);
  }
  avg.push_back("--out");
  avg.push_back(p(dir / "common.csv"));
  REQUIRE(run(avg).code == cli::kExitOk);
  const auto fit = run({"fit", "--in", p(dir / "common.csv"), "--orders", "1:4", "--table", p(dir / "orders.csv"),
                        "--overlay", p(dir / "overlay.csv"), "--out", p(dir / "model.json")});
  REQUIRE(fit.code == cli::kExitOk);
  const auto model = io::read_model(dir / "model.json");
  CHECK(model.nb() >= 3);
  CHECK(std::isfinite(model.cost));
  CHECK(data_rows(dir / "orders.csv") == 4);
  CHECK(run({"compare", "--a", p(dir / "common.csv"), "--b", frfs[0], "--out", p(dir / "cmp.csv")}).code ==
        cli::kExitOk);
  REQUIRE(run({"distortions", "--in", p(dir / "rec0.csv"), "--spec", p(dir / "spec.json"), "--out",
               p(dir / "dist.csv")}).code == cli::kExitOk);
  CHECK(run({"plot", "--distortion", p(dir / "dist.csv"), "--out", p(dir / "dist.svg")}).code == cli::kExitOk);
  CHECK(run({"plot", "--averaged", p(dir / "common.csv"), "--concat", frfs[1], "--model", p(dir / "model.json"),
             "--out", p(dir / "cmp.svg")}).code == cli::kExitOk);
}

TEST_CASE("bench listing") {
  const auto r = run({"bench", "list"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("design_arithmetic") != std::string::npos);
  CHECK(r.out.find("determinism") != std::string::npos);
}
