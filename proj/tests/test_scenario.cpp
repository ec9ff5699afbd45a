// Scenario-runner tests over the bundled configs: the single-provider shock
// must replay the worked risk-table numbers, the forge relay must survive a
// missed commitment and a corrupted record, the liquidation wave must close
// every position, and reruns must be byte-identical.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "interpool/scenario.hpp"

using namespace interpool;

namespace {

std::string scenario_path(const char* file) {
    return std::string(INTERPOOL_SCENARIO_DIR) + "/" + file;
}

// Splits one CSV report row; columns are
// block,provider,status,current_i,current_n,risky_i,risky_n,collateral,
// remaining,injection_request,total_balance.
std::vector<std::string> csv_row(const std::string& csv, uint64_t block, uint64_t provider) {
    std::istringstream in(csv);
    std::string line;
    std::string prefix = std::to_string(block) + "," + std::to_string(provider) + ",";
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) != 0) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        return cols;
    }
    FAIL("no report row for block " << block << " provider " << provider);
    return {};
}

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("single provider shock replays the worked risk table") {
    auto cfg = ScenarioConfig::from_file(scenario_path("single_provider_shock.json"));
    ScenarioRunner runner(cfg);
    auto out = runner.run();

    // Join at 2.5: ten native split into a five-native pool leg matched by
    // two minted intertokens, five native held back as collateral.
    auto r1 = csv_row(out.report_csv, 1, 1);
    CHECK(r1[3] == "2");
    CHECK(r1[4] == "5");
    CHECK(r1[7] == "5");
    CHECK(r1[8] == "5");

    // After the shock to ratio 5 the position is worth sqrt(2)/sqrt(50) per
    // leg; 0.59 minted intertokens are no longer covered and cost 2.93
    // native at the new price, leaving 2.07 of the collateral free.
    auto r10 = csv_row(out.report_csv, 10, 1);
    CHECK(num(r10[3]) == Catch::Approx(1.41).margin(0.005));
    CHECK(num(r10[4]) == Catch::Approx(7.07).margin(0.005));
    CHECK(num(r10[5]) == Catch::Approx(0.59).margin(0.005));
    CHECK(num(r10[6]) == Catch::Approx(2.93).margin(0.005));
    CHECK(num(r10[7]) == Catch::Approx(5.00).margin(0.005));
    CHECK(num(r10[8]) == Catch::Approx(2.07).margin(0.005));
    CHECK(num(r10[10]) == Catch::Approx(9.14).margin(0.005));

    // The cure window opens one block later with the uncovered value as the
    // requested injection.
    auto flags = runner.simulation().log().of_kind("provider_flagged");
    REQUIRE(flags.size() == 1);
    CHECK(flags[0]->block == 11);
    CHECK(num(flags[0]->fields.at("injection_request").get<std::string>()) ==
          Catch::Approx(2.93).margin(0.005));

    // The second shock to ratio 10 puts the position underwater: the whole
    // minted intertoken is uncovered, worth ten native against five of
    // collateral.
    auto r12 = csv_row(out.report_csv, 12, 1);
    CHECK(num(r12[3]) == Catch::Approx(1.00).margin(0.005));
    CHECK(num(r12[4]) == Catch::Approx(10.00).margin(0.005));
    CHECK(num(r12[6]) == Catch::Approx(10.00).margin(0.005));
    CHECK(num(r12[8]) == Catch::Approx(-5.00).margin(0.005));

    // Liquidation closes it the next block: pool share plus collateral minus
    // the forfeited uncovered value leaves exactly five native.
    auto liqs = runner.simulation().log().of_kind("provider_liquidated");
    REQUIRE(liqs.size() == 1);
    CHECK(liqs[0]->block == 13);
    CHECK(liqs[0]->fields.at("reason") == "underwater");
    CHECK(num(liqs[0]->fields.at("refund").get<std::string>()) ==
          Catch::Approx(5.00).margin(0.005));
    CHECK(num(liqs[0]->fields.at("forfeit").get<std::string>()) ==
          Catch::Approx(10.00).margin(0.005));
}

TEST_CASE("forge relay rides out a missed commitment and a corrupted record") {
    auto cfg = ScenarioConfig::from_file(scenario_path("forge_relay_100.json"));
    ScenarioRunner runner(cfg);
    auto out = runner.run();
    const auto& log = runner.simulation().log();

    // Five claims: four settle, the deaf provider's one defaults.
    CHECK(log.count("claim_opened") == 5);
    CHECK(log.count("claim_assigned") == 5);
    CHECK(log.count("burn_settled") == 4);
    CHECK(log.count("claim_defaulted") == 1);

    std::vector<uint64_t> settle_blocks;
    for (const auto* e : log.of_kind("burn_settled")) settle_blocks.push_back(e->block);
    CHECK(settle_blocks == std::vector<uint64_t>{15, 42, 62, 75});
    CHECK(log.of_kind("claim_defaulted")[0]->block == 27);
    CHECK(log.of_kind("claim_defaulted")[0]->fields.at("provider") == 202);

    // Block 40 ships an empty batch: the forge has nothing to order, the
    // commitment is missed, and block 41 carries both heights in a
    // double-width batch.
    CHECK(log.count("forge_infeasible") == 1);
    REQUIRE(out.reports.size() == 100);
    CHECK(out.reports[39].forge_failed);
    CHECK(out.reports[39].forged_heights.empty());
    CHECK(out.reports[40].forged_heights == std::vector<int64_t>{40, 41});

    // The record for height 60 is corrupted, so the first proof for claim 4
    // is rejected and raises the alarm; the same block re-forges heights 60
    // and 61 honestly and the re-submitted proof settles at the deadline.
    CHECK(log.count("proof_rejected") == 1);
    CHECK(log.count("forgery_alarm") == 1);
    CHECK(log.of_kind("forgery_alarm")[0]->block == 61);
    CHECK(out.reports[60].forged_heights == std::vector<int64_t>{60, 61});
    const auto* settled4 = log.of_kind("burn_settled")[2];
    CHECK(settled4->fields.at("claim_id") == 4);
    CHECK(settled4->block == 62);

    // Every forged batch carries the true finality header bits and the
    // booster key bits.
    const auto& chain = runner.simulation().chain();
    const Hash256& booster = runner.simulation().booster_pubkey();
    auto booster_bits = poe::hash_prefix_bits(booster, cfg.sim.hash_bits);
    size_t forged_blocks = 0;
    for (const auto& rep : out.reports) {
        if (rep.forge_failed) continue;
        REQUIRE(rep.forged_bits.size() == rep.forged_heights.size());
        for (size_t t = 0; t < rep.forged_heights.size(); ++t)
            CHECK(rep.forged_bits[t] ==
                  poe::hash_prefix_bits(chain.block_at(rep.forged_heights[t]).header_hash,
                                        cfg.sim.hash_bits));
        CHECK(rep.booster_bits == booster_bits);
        ++forged_blocks;
    }
    CHECK(forged_blocks == 99);

    // The voluntary exit goes through once no claim is pending.
    CHECK(log.count("provider_exited") == 1);
    CHECK(log.of_kind("provider_exited")[0]->block == 85);
    CHECK(runner.simulation().risk_book().find(201)->status == ProviderStatus::exited);
}

TEST_CASE("liquidation wave closes every position exactly once") {
    auto cfg = ScenarioConfig::from_file(scenario_path("liquidation_wave.json"));
    ScenarioRunner runner(cfg);
    auto out = runner.run();

    auto liqs = runner.simulation().log().of_kind("provider_liquidated");
    REQUIRE(liqs.size() == 10);
    std::vector<uint64_t> seen;
    for (const auto* e : liqs) {
        CHECK(e->fields.at("reason") == "underwater");
        seen.push_back(e->fields.at("provider").get<uint64_t>());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<uint64_t> expect;
    for (uint64_t id = 101; id <= 110; ++id) expect.push_back(id);
    CHECK(seen == expect);

    // Later entrants bought in at higher ratios and go under later.
    CHECK(liqs.front()->block == 9);
    CHECK(liqs.back()->block == 16);

    // Every position closed: all minted supply is burned again and no claim
    // escrow is left behind.
    CHECK(out.summary["final"]["minted"] == out.summary["final"]["burned"]);
    CHECK(out.summary["final"]["escrow"] == "0");
}

TEST_CASE("report schema stays stable against the golden outputs") {
    auto golden = [](const char* file) {
        std::ifstream in(std::string(INTERPOOL_GOLDEN_DIR) + "/" + file, std::ios::binary);
        REQUIRE(in);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    auto shock = ScenarioConfig::from_file(scenario_path("single_provider_shock.json"));
    ScenarioRunner shock_runner(shock);
    auto shock_out = shock_runner.run();
    CHECK(shock_out.events_jsonl == golden("single_provider_shock/events.jsonl"));
    CHECK(shock_out.report_csv == golden("single_provider_shock/report.csv"));
    CHECK(shock_out.summary.dump(2) + "\n" == golden("single_provider_shock/summary.json"));

    auto wave = ScenarioConfig::from_file(scenario_path("liquidation_wave.json"));
    ScenarioRunner wave_runner(wave);
    CHECK(wave_runner.run().summary.dump(2) + "\n" == golden("liquidation_wave/summary.json"));
}

TEST_CASE("scenario outputs are byte-identical across reruns and thread counts") {
    auto cfg = ScenarioConfig::from_file(scenario_path("forge_relay_100.json"));
    cfg.blocks = 25;

    auto run_once = [](ScenarioConfig c) {
        ScenarioRunner runner(std::move(c));
        return runner.run();
    };
    auto a = run_once(cfg);
    auto b = run_once(cfg);
    CHECK(a.events_jsonl == b.events_jsonl);
    CHECK(a.report_csv == b.report_csv);
    CHECK(a.summary.dump() == b.summary.dump());

    ScenarioConfig parallel = cfg;
    parallel.sim.search.threads = 4;
    auto c = run_once(parallel);
    CHECK(a.events_jsonl == c.events_jsonl);
    CHECK(a.report_csv == c.report_csv);
    CHECK(a.summary.dump() == c.summary.dump());
}
