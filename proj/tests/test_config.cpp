#include <catch_amalgamated.hpp>

#include "kmv/config.hpp"

using namespace kmv;

namespace {

const char* kMinimal = R"(
[model]
lambda = 0.5
A = 0.75
L_U = 8
L_W = 0.03125
[confining]
kind = double_well
[interaction]
kind = harmonic_attract
[sim]
dt = 0.001
t_final = 2
seed = 42
[experiment]
kind = drift
)";

} // namespace

TEST_CASE("minimal config parses with defaults filled") {
    auto res = parse_config(kMinimal);
    CAPTURE(res.errors);
    REQUIRE(res.ok());
    CHECK(res.cfg.model.lambda == 0.5);
    CHECK(res.cfg.model.L_W == 0.03125);
    CHECK(res.cfg.model.d == 1);               // default
    CHECK(res.cfg.sim.n_replicas == 1024);     // default
    CHECK(res.cfg.seed_given);
    CHECK(res.cfg.sim.seed == 42);
    CHECK(res.cfg.experiment == ExperimentKind::drift);
    CHECK(res.cfg.output_dir == "out");
}

TEST_CASE("interaction smallness violation names the key and the rule") {
    std::string doc = kMinimal;
    doc.replace(doc.find("L_W = 0.03125"), 13, "L_W = 0.5    ");
    auto res = parse_config(doc);
    REQUIRE_FALSE(res.ok());
    bool found = false;
    for (const auto& e : res.errors)
        found = found || (e.find("model.L_W") != std::string::npos &&
                          e.find("lambda/8") != std::string::npos);
    CHECK(found);
}

TEST_CASE("all errors are reported, not just the first") {
    std::string doc = R"(
[model]
lambda = -1
d = 0
bogus_key = 3
[sim]
dt = 5
seed = 1
)";
    auto res = parse_config(doc);
    REQUIRE_FALSE(res.ok());
    CHECK(res.errors.size() >= 4);
    auto has = [&](const char* frag) {
        for (const auto& e : res.errors)
            if (e.find(frag) != std::string::npos) return true;
        return false;
    };
    CHECK(has("model.lambda"));
    CHECK(has("model.d"));
    CHECK(has("model.bogus_key"));
    CHECK(has("sim.dt"));
}

TEST_CASE("emit/parse round-trip is semantically identical") {
    auto res = parse_config(kMinimal);
    REQUIRE(res.ok());
    std::string emitted = emit_config(res.cfg);
    auto res2 = parse_config(emitted);
    CAPTURE(res2.errors);
    REQUIRE(res2.ok());
    CHECK(emit_config(res2.cfg) == emitted);
    CHECK(res2.cfg.model.lambda == res.cfg.model.lambda);
    CHECK(res2.cfg.sim.seed == res.cfg.sim.seed);
    CHECK(res2.cfg.experiment == res.cfg.experiment);
    CHECK(res2.cfg.ch_n_sweep == res.cfg.ch_n_sweep);
}

TEST_CASE("defaults table is itself a valid config") {
    RunConfig def;
    auto res = parse_config(emit_config(def));
    CAPTURE(res.errors);
    // the default config has no seed; everything else must validate
    for (const auto& e : res.errors) CHECK(e.find("seed") != std::string::npos);
}

TEST_CASE("list fields parse") {
    std::string doc = kMinimal;
    doc += R"(
[chaos]
n_sweep = 16,64
t_eval_rel = 1,3
[contract]
xi_sweep_rel = 0.1,0.01,0.001
)";
    auto res = parse_config(doc);
    CAPTURE(res.errors);
    REQUIRE(res.ok());
    CHECK(res.cfg.ch_n_sweep == std::vector<int>{16, 64});
    CHECK(res.cfg.ct_xi_sweep_rel.size() == 3);
}
