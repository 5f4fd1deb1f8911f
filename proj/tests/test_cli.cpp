#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kpn/config.hpp"
#include "kpn/error.hpp"
#include "kpn/io.hpp"
#include "kpn/kplane.hpp"
#include "kpn/oracles.hpp"
#include "kpn/run.hpp"

using namespace kpn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kpn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("csv ingestion") {
    std::istringstream ok("x1,x2,y\n0,0,1\n1,0,2\n");
    const Dataset ds = dataset_from_table(parse_csv(ok));
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 2);
    CHECK(ds.y[1] == 2.0);

    std::istringstream bad("x,y\n1,2\nabc,3\n");
    try {
      parse_csv(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_csv(empty), ParseError);
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(parse_csv(ragged), ParseError);
    std::istringstream inf("1,inf\n");
    CHECK_THROWS_AS(parse_csv(inf), ParseError);
    std::istringstream headerless("1,2,3\n4,5,6\n");
    CHECK(parse_csv(headerless).values.rows() == 2);
  }

  TEST_CASE("binary grid and plane round trip") {
    const fs::path dir = scratch("binary");
    const GridFunction f = GridFunction::sample(uniform_axes(2, 9, 1.5), [](std::span<const double> x) {
      return x[0] - 3.0 * x[1] * x[1];
    });
    write_grid((dir / "g.bin").string(), f);
    const GridFunction g = read_grid((dir / "g.bin").string());
    CHECK(g.axes() == f.axes());
    CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));

    const PlaneFunction R = kplane_transform(f, DirectionDesign::half_circle(5), default_t_axes(f.axes(), 1));
    write_plane((dir / "p.bin").string(), R);
    const PlaneFunction S = read_plane((dir / "p.bin").string());
    CHECK(S.design().size() == 5);
    CHECK(max_abs_difference(R, S) == 0.0);

    write_file(dir / "trunc.bin", "{\"kind\":\"grid\",\"dims\":1,\"extents\":[1],\"counts\":[4]}\n1234");
    CHECK_THROWS_AS(read_grid((dir / "trunc.bin").string()), ParseError);
  }

  TEST_CASE("config overrides and environment") {
    nlohmann::json doc = default_config_json();
    apply_override(doc, "--solver.lambda=0.25");
    apply_override(doc, "io.output_dir=123");
    CHECK(doc["solver"]["lambda"] == 0.25);
    CHECK(doc["io"]["output_dir"] == "123");
    CHECK_THROWS_AS(apply_override(doc, "solver.nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "solver=1"), ConfigError);

    const fs::path dir = scratch("config");
    write_file(dir / "c.json", R"({"mode": "greens", "operator": {"alpha": 3.0}})");
    ::setenv("KPN_CONFIG", (dir / "c.json").string().c_str(), 1);
    const RunConfig c = load_config(std::nullopt, {"--solver.width=7"});
    ::unsetenv("KPN_CONFIG");
    CHECK(c.mode == Mode::greens);
    CHECK(c.op.alpha == 3.0);
    CHECK(c.solver.width == 7);
    CHECK_THROWS_AS(load_config(std::nullopt, {"mode=fit"}), ConfigError);  // no dataset

    write_file(dir / "bad.json", R"({"solver": {"lamda": 1}})");
    CHECK_THROWS_AS(load_config((dir / "bad.json").string(), {}), SchemaError);
  }

  TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  }

  TEST_CASE("lasso, prune and predict") {
    const fs::path dir = scratch("run");
    std::ostringstream csv;
    csv << "x1,x2,y\n";
    std::mt19937_64 rng(derive_seed(1, "test.cli"));
    std::normal_distribution<double> n01;
    for (int i = 0; i < 10; ++i) {
      const double a = n01(rng), b = n01(rng);
      csv << a << ',' << b << ',' << std::sin(a) + b * b << '\n';
    }
    write_file(dir / "data.csv", csv.str());
    write_file(dir / "inputs.csv", "0.1,0.2\n-1,0.5\n0,0\n");
    std::ostringstream log;

    RunConfig c = load_config(std::nullopt, {"mode=lasso", "io.data=" + (dir / "data.csv").string(),
                                             "io.output_dir=" + (dir / "lasso").string()});
    CHECK(run(c, log) == 0);
    const auto metrics = read_json((dir / "lasso" / "metrics.json").string());
    CHECK(metrics["nnz"].get<long>() <= metrics["sparsity_bound"].get<long>());
    CHECK(metrics["kkt_residual"].get<double>() <= 1e-8);
    const Model m = deserialize(read_json((dir / "lasso" / "model.json").string()));
    CHECK(sparsity_certificate(m, 10).ok);

    c = load_config(std::nullopt, {"mode=prune", "io.data=" + (dir / "data.csv").string(),
                                   "io.model=" + (dir / "lasso" / "model.json").string(),
                                   "io.output_dir=" + (dir / "prune").string()});
    CHECK(run(c, log) == 0);
    CHECK(read_json((dir / "prune" / "metrics.json").string())["removed"] == 0);

    c = load_config(std::nullopt, {"mode=predict", "io.inputs=" + (dir / "inputs.csv").string(),
                                   "io.model=" + (dir / "lasso" / "model.json").string(),
                                   "io.output_dir=" + (dir / "pred").string()});
    CHECK(run(c, log) == 0);
    const NumericTable pred = read_csv((dir / "pred" / "predictions.csv").string());
    REQUIRE(pred.values.rows() == 3);
    const double x0[] = {0.1, 0.2};
    CHECK(pred.values(0, 0) == doctest::Approx(forward(m, x0)).epsilon(1e-15));
  }

  TEST_CASE("fit metrics are reproducible") {
    const fs::path dir = scratch("fit");
    write_file(dir / "data.csv", "x,y\n-1,0.5\n-0.5,-0.2\n0,0.1\n0.4,0.6\n0.9,-0.3\n");
    auto fit = [&](const std::string& out) {
      const RunConfig c = load_config(std::nullopt, {"mode=fit", "operator.d=1", "operator.k=0",
                                                     "io.data=" + (dir / "data.csv").string(),
                                                     "solver.width=6", "io.output_dir=" + (dir / out).string()});
      std::ostringstream log;
      CHECK(run(c, log) == 0);
      return read_json((dir / out / "metrics.json").string()).dump();
    };
    CHECK(fit("a") == fit("b"));
  }
}
