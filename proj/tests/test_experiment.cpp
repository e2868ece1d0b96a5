#include "mangen/core.hpp"
#include "mangen/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace mangen;

namespace {

Json cheap_audit() {
    return Json{{"experiment", "geodesic-audit"}, {"manifolds", Json::array({"circle", "sphere"})}, {"trials", 3}};
}

std::string schema_message(const Json& raw) {
    try {
        normalize_config(raw);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("experiment list is fixed") {
    const auto& list = list_experiments();
    REQUIRE(list.size() == 5);
    CHECK(list[0].name == "universality");
    CHECK(list[1].name == "multiclass");
    CHECK(list[2].name == "embedding-check");
    CHECK(list[3].name == "cycle");
    CHECK(list[4].name == "geodesic-audit");
    CHECK(list_experiments_text().find("cycle") != std::string::npos);
}

TEST_CASE("normalize fills defaults and is idempotent") {
    for (const auto& e : list_experiments()) {
        const Json cfg = normalize_config(Json{{"experiment", e.name}});
        CHECK(cfg == default_config(e.name));
        CHECK(normalize_config(cfg) == cfg);
        CHECK(normalize_config(Json::parse(cfg.dump())) == cfg);
    }
    const Json cfg = normalize_config(Json{{"experiment", "cycle"}, {"delta", 0.25}});
    CHECK(cfg["delta"] == 0.25);
    CHECK(cfg["seed"] == 3);
}

TEST_CASE("normalize rejects bad configs with named keys") {
    CHECK(schema_message(Json{{"experiment", "universality"}, {"epsilon", -0.05}}).find("epsilon") != std::string::npos);
    CHECK(schema_message(Json{{"experiment", "universality"}, {"epsilonn", 0.05}}).find("epsilonn") != std::string::npos);
    CHECK(schema_message(Json{{"experiment", "cycle"}, {"training", {{"epochs", "many"}}}}).find("training.epochs") !=
          std::string::npos);
    const std::string both =
        schema_message(Json{{"experiment", "universality"}, {"alpha", 1}, {"diameter", {{"beta", 2}}}});
    CHECK(both.find("alpha") != std::string::npos);
    CHECK(both.find("beta") != std::string::npos);
    CHECK_THROWS_AS(normalize_config(Json{{"experiment", "nonsense"}}), SchemaError);
    CHECK_THROWS_AS(normalize_config(Json::array()), SchemaError);
    CHECK_THROWS_AS(normalize_config(Json{{"seed", 1}}), SchemaError);
}

TEST_CASE("output directory precedence") {
    const Json cfg = normalize_config(Json{{"experiment", "cycle"}, {"output_dir", "from-config"}});
    const Json plain = normalize_config(Json{{"experiment", "cycle"}});
    ::unsetenv("MANGEN_OUT_DIR");
    CHECK(resolve_output_dir(plain, {}) == "out/cycle");
    CHECK(resolve_output_dir(cfg, {}) == "from-config");
    ::setenv("MANGEN_OUT_DIR", "from-env", 1);
    CHECK(resolve_output_dir(cfg, {}) == "from-env");
    RunOptions opt;
    opt.out_dir = "from-flag";
    CHECK(resolve_output_dir(cfg, opt) == "from-flag");
    ::unsetenv("MANGEN_OUT_DIR");
}

TEST_CASE("identical runs give identical metrics") {
    RunOptions opt;
    opt.write_artifacts = false;
    const auto a = run_experiment(cheap_audit(), opt);
    const auto b = run_experiment(cheap_audit(), opt);
    CHECK(a.document["metrics"] == b.document["metrics"]);
    CHECK(a.document["config"] == b.document["config"]);
    CHECK(a.pass == b.pass);
    CHECK(a.pass);
    CHECK(a.document.contains("timings"));
    CHECK(a.artifacts.empty());
}

TEST_CASE("report file is written to the output directory") {
    const auto dir = std::filesystem::temp_directory_path() / "mangen-test-report";
    std::filesystem::remove_all(dir);
    RunOptions opt;
    opt.out_dir = dir.string();
    const auto r = run_experiment(cheap_audit(), opt);
    REQUIRE(std::filesystem::exists(dir / "report.json"));
    const Json back = load_json((dir / "report.json").string());
    CHECK(back["metrics"] == r.document["metrics"]);
    CHECK(back["pass"] == r.pass);
    const std::vector<std::string> keys{"experiment", "config", "metrics", "targets", "pass", "timings"};
    std::vector<std::string> got;
    for (const auto& item : back.items()) got.push_back(item.key());
    CHECK(got == keys);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config files") {
    CHECK_THROWS_AS(load_json("/nonexistent/config.json"), IoError);
    const auto path = std::filesystem::temp_directory_path() / "mangen-bad.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_json(path.string()), SchemaError);
    std::filesystem::remove(path);
}
