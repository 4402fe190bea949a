#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "threatkb/analysis.hpp"
#include "threatkb/dsl.hpp"
#include "threatkb/reasoner.hpp"

namespace {

using namespace threatkb;

// A goal holding `groups` three-leaf operator blocks under one AND, cycling
// through or/and/sequence so every evaluator path gets exercised.
std::string make_tree_text(int groups) {
    static const char* ops[] = {"or", "and", "sequence"};
    std::string body;
    int leaf = 0;
    for (int g = 0; g < groups; ++g) {
        body += "      ";
        body += ops[g % 3];
        body += " {\n";
        for (int i = 0; i < 3; ++i) {
            body += "        attack a" + std::to_string(leaf) + " \"step " +
                    std::to_string(leaf) + "\"\n";
            ++leaf;
        }
        body += "      }\n";
    }
    return "attacktree \"bench\" {\n"
           "  objective obj \"objective\" {\n"
           "    goal g \"goal\" {\n"
           "    and {\n" +
           body +
           "    }\n"
           "    }\n"
           "  }\n"
           "}\n";
}

void BM_Parse(benchmark::State& state) {
    std::string text = make_tree_text(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        ParseResult result = parse(text);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_Parse)->Arg(4)->Arg(16)->Arg(64);

void BM_Serialize(benchmark::State& state) {
    AttackTree tree = *parse(make_tree_text(static_cast<int>(state.range(0)))).tree;
    for (auto _ : state) {
        std::string out = serialize(tree);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_Serialize)->Arg(4)->Arg(16)->Arg(64);

void BM_EnumerateScenarios(benchmark::State& state) {
    AttackTree tree = *parse(make_tree_text(static_cast<int>(state.range(0)))).tree;
    for (auto _ : state) {
        ScenarioResult result = enumerate_scenarios(tree);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_EnumerateScenarios)->Arg(2)->Arg(4)->Arg(6);

void BM_Satisfies(benchmark::State& state) {
    AttackTree tree = *parse(make_tree_text(static_cast<int>(state.range(0)))).tree;
    Trace trace = leaves(tree);
    for (auto _ : state) {
        bool ok = satisfies(tree, trace);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_Satisfies)->Arg(4)->Arg(16)->Arg(64);

void BM_ApplyRules(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    FactBase fb;
    for (int i = 0; i + 1 < n; ++i)
        fb.add({"hasSequence",
                {Arg::constant("s" + std::to_string(i)),
                 Arg::constant("s" + std::to_string(i + 1))}},
               {Provenance::Kind::Asserted, -1});
    std::vector<Rule> rules = parse_rules(
        "hasSequence(?a, ?b) ^ hasSequence(?b, ?c) -> hasSequence(?a, ?c)\n");
    for (auto _ : state) {
        FactBase out = apply_rules(fb, rules);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_ApplyRules)->Arg(8)->Arg(16)->Arg(32);

} // namespace

BENCHMARK_MAIN();
