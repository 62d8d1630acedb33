#include "reqsolve/errors.hpp"
#include "reqsolve/solver.hpp"

#include "../support/index_builder.hpp"
#include "../support/random_problems.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace reqsolve;
using testutil::IndexBuilder;
using testutil::TempDir;

namespace {

Version v(const char* s) { return Version::parse(s); }

Dependency dep(const char* name, const char* spec) { return {name, Specifier::parse(spec), {}}; }

ConstraintProblem torch_problem() {
    ConstraintProblem p;
    p.variables["torch"] = {v("1.4.0"), v("1.5.0")};
    p.variables["torchvision"] = {v("0.5.0"), v("0.6.0")};
    p.edges[{"torchvision", v("0.5.0")}] = {dep("torch", "==1.4.0")};
    p.edges[{"torchvision", v("0.6.0")}] = {dep("torch", "==1.5.0")};
    p.edges[{"torch", v("1.4.0")}] = {};
    p.edges[{"torch", v("1.5.0")}] = {};
    return p;
}

bool formula_holds(const Formula& f, const std::set<int>& chosen) {
    for (const auto& g : f.groups) {
        int n = 0;
        for (int var : g) n += chosen.count(var) ? 1 : 0;
        if (n != 1) return false;
    }
    for (const auto& c : f.clauses) {
        bool any = false;
        for (const auto& l : c) any = any || (chosen.count(l.var) != 0) == l.positive;
        if (!any) return false;
    }
    return true;
}

}  // namespace

TEST(Solver, TargetForcesDependencyToMove) {
    auto p = torch_problem();
    p.pinned = {{"torch", v("1.4.0")}, {"torchvision", v("0.6.0")}};
    p.forced = {{"torchvision", v("0.6.0")}};
    auto r = solve(p);
    ASSERT_TRUE(r.assignment);
    EXPECT_EQ(r.assignment->at("torch"), v("1.5.0"));
    EXPECT_EQ(r.assignment->at("torchvision"), v("0.6.0"));
}

TEST(Solver, ConsistentPinsAreKept) {
    auto p = torch_problem();
    p.pinned = {{"torch", v("1.4.0")}, {"torchvision", v("0.5.0")}};
    auto r = solve(p);
    ASSERT_TRUE(r.assignment);
    EXPECT_EQ(*r.assignment, (Assignment{{"torch", v("1.4.0")}, {"torchvision", v("0.5.0")}}));
}

TEST(Solver, OnlyModelPairsOldVisionWithOldTorch) {
    ConstraintProblem p;
    p.variables["torch"] = {v("1.4.0"), v("1.5.0")};
    p.variables["torchvision"] = {v("0.5.0")};
    p.edges[{"torchvision", v("0.5.0")}] = {dep("torch", "==1.4.0")};
    const auto f = encode(p);
    int models = 0;
    for (int a = 0; a < 2; ++a) {
        std::set<int> chosen{a, 2};
        if (formula_holds(f, chosen)) {
            ++models;
            EXPECT_EQ(f.selectors[static_cast<std::size_t>(a)].second, v("1.4.0"));
        }
    }
    EXPECT_EQ(models, 1);
}

TEST(Solver, SingleForcedLiteral) {
    ConstraintProblem p;
    p.variables["only"] = {v("1.0")};
    p.forced["only"] = v("1.0");
    const auto f = encode(p);
    EXPECT_EQ(f.selectors.size(), 1u);
    auto r = solve(p);
    ASSERT_TRUE(r.assignment);
    EXPECT_EQ(r.assignment->size(), 1u);
}

TEST(Solver, CyclicMetadataTerminates) {
    ConstraintProblem p;
    p.variables["a"] = {v("1"), v("2")};
    p.variables["b"] = {v("1"), v("2")};
    p.edges[{"a", v("1")}] = {dep("b", "==1")};
    p.edges[{"a", v("2")}] = {dep("b", "==2")};
    p.edges[{"b", v("1")}] = {dep("a", "==1")};
    p.edges[{"b", v("2")}] = {dep("a", "==2")};
    p.pinned = {{"a", v("1")}};
    const auto f = encode(p);
    EXPECT_EQ(f.clauses.size(), 4u);
    auto r = solve(p);
    ASSERT_TRUE(r.assignment);
    EXPECT_EQ(*r.assignment, (Assignment{{"a", v("1")}, {"b", v("1")}}));
}

TEST(Solver, DiamondModelsMatchEnumeration) {
    ConstraintProblem p;
    for (const char* n : {"top", "left", "right", "base"}) p.variables[n] = {v("1"), v("2"), v("3")};
    p.edges[{"top", v("1")}] = {dep("left", ">=2"), dep("right", "<=2")};
    p.edges[{"top", v("2")}] = {dep("left", "==3"), dep("right", "==3")};
    p.edges[{"left", v("2")}] = {dep("base", "<3")};
    p.edges[{"left", v("3")}] = {dep("base", "==3")};
    p.edges[{"right", v("3")}] = {dep("base", "!=3")};
    p.edges[{"right", v("1")}] = {dep("base", ">1")};
    const auto f = encode(p);
    const std::vector<std::string> names = {"base", "left", "right", "top"};
    for (int code = 0; code < 81; ++code) {
        Assignment a;
        std::set<int> chosen;
        int c = code;
        for (std::size_t g = 0; g < 4; ++g) {
            const int pos = c % 3;
            c /= 3;
            a[names[g]] = p.variables.at(names[g])[static_cast<std::size_t>(pos)];
            chosen.insert(f.groups[g][static_cast<std::size_t>(pos)]);
        }
        EXPECT_EQ(formula_holds(f, chosen), validate(a, p.edges).empty()) << code;
    }
}

TEST(Solver, RandomProblemsMatchBruteForce) {
    std::mt19937 rng(20240611);
    int satisfiable = 0;
    for (int i = 0; i < 300; ++i) {
        const auto p = testutil::random_problem(rng);
        const auto expected = testutil::brute_force_optimum(p);
        const auto got = solve(p);
        ASSERT_EQ(expected.has_value(), got.assignment.has_value()) << "problem " << i;
        if (!expected) {
            EXPECT_FALSE(got.conflict.empty());
            continue;
        }
        ++satisfiable;
        EXPECT_TRUE(validate(*got.assignment, p.edges).empty());
        EXPECT_EQ(got.objective, objective(p, *expected)) << "problem " << i;
        EXPECT_EQ(*got.assignment, *expected) << "problem " << i;
        for (const auto& [name, ver] : p.forced) EXPECT_EQ(got.assignment->at(name), ver);
    }
    EXPECT_GT(satisfiable, 100);
}

TEST(Solver, SatisfyingPinsAreReturnedExactly) {
    std::mt19937 rng(7);
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        auto p = testutil::random_problem(rng);
        p.forced.clear();
        for (const auto& [name, vars] : p.variables)
            if (!p.pinned.count(name)) p.pinned[name] = vars.front();
        Assignment pins(p.pinned.begin(), p.pinned.end());
        if (!validate(pins, p.edges).empty()) continue;
        ++checked;
        auto r = solve(p);
        ASSERT_TRUE(r.assignment);
        EXPECT_EQ(*r.assignment, pins);
    }
    EXPECT_GT(checked, 30);
}

TEST(Solver, UnsatisfiableReportsConflictingEdges) {
    auto p = torch_problem();
    p.variables["extra"] = {v("1.0")};
    p.edges[{"extra", v("1.0")}] = {dep("torch", "==1.5.0")};
    p.forced = {{"torchvision", v("0.5.0")}, {"extra", v("1.0")}};
    auto r = solve(p);
    EXPECT_FALSE(r.assignment);
    // `extra` has a single candidate, so forcing it adds nothing to the conflict.
    ASSERT_EQ(r.conflict.size(), 3u);
    EXPECT_EQ(r.conflict[0], "extra -> torch [1.0: ==1.5.0]");
    EXPECT_EQ(r.conflict[1], "forced torchvision==0.5.0");
    EXPECT_EQ(r.conflict[2], "torchvision -> torch [0.5.0: ==1.4.0; 0.6.0: ==1.5.0]");
}

TEST(Solver, ValidateFlagsBrokenEdge) {
    const auto p = torch_problem();
    auto out = validate({{"torch", v("1.5.0")}, {"torchvision", v("0.5.0")}}, p.edges);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].dependency.name, PackageName("torch"));
    EXPECT_EQ(out[0].str(), "torchvision 0.5.0 requires torch==1.4.0, found 1.5.0");
    EXPECT_TRUE(validate({{"torchvision", v("0.5.0")}}, p.edges).empty());
}

TEST(Solver, ValidateAgreesWithDirectEdgeCheck) {
    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto p = testutil::random_problem(rng);
        Assignment a;
        for (const auto& [name, vars] : p.variables) a[name] = vars[rng() % vars.size()];
        std::size_t broken = 0;
        for (const auto& [key, deps] : p.edges) {
            if (!(a.at(key.first) == key.second)) continue;
            for (const auto& d : deps) broken += d.spec.contains(a.at(d.name)) ? 0 : 1;
        }
        EXPECT_EQ(validate(a, p.edges).size(), broken);
    }
}

TEST(Solver, FormulaDumpMentionsEverySelector) {
    auto p = torch_problem();
    p.pinned = {{"torch", v("1.4.0")}};
    p.forced = {{"torchvision", v("0.5.0")}};
    const auto text = dump_formula(encode(p));
    EXPECT_NE(text.find("(declare-const |torch==1.4.0| Bool)"), std::string::npos);
    EXPECT_NE(text.find("(assert (or (not |torchvision==0.5.0|) |torch==1.4.0|))"), std::string::npos);
    EXPECT_NE(text.find("(assert-soft |torch==1.4.0| :weight 3)"), std::string::npos);
    EXPECT_NE(text.find("(check-sat)"), std::string::npos);
}

class BuildProblemTest : public ::testing::Test {
protected:
    void SetUp() override {
        IndexBuilder b(index_.path());
        b.add("app", {"1.0", {"lib>=1.0"}, {}})
            .add("lib", {"1.0", {"core==1.0"}, {}})
            .add("lib", {"2.0", {"core>=2.0", "ghost>=1"}, {}})
            .add("core", {"1.0", {"base"}, {}})
            .add("core", {"2.0", {"base"}, {}})
            .add("base", {"0.1", {}, {}})
            .add("other", {"1.0", {}, {}})
            .add("other", {"2.0b1", {}, {}});
        b.write();
        options_.cache_dir = cache_.path();
    }

    KnowledgeStore store() { return KnowledgeStore(make_index_client("file://" + index_.path().string()), options_); }

    TempDir index_, cache_;
    KnowledgeOptions options_;
};

TEST_F(BuildProblemTest, ClosureCoversTransitiveDependencies) {
    auto s = store();
    std::vector<std::string> notes;
    auto p = build_problem(parse_requirements("app==1.0\nlib==1.0\n"), "lib", v("2.0"), s, {}, &notes);
    std::set<std::string> names;
    for (const auto& [n, _] : p.variables) names.insert(n.normalized());
    EXPECT_EQ(names, (std::set<std::string>{"app", "base", "core", "lib"}));
    EXPECT_EQ(p.forced.at("lib"), v("2.0"));
    EXPECT_EQ(p.pinned.at("lib"), v("2.0"));
    EXPECT_EQ(p.pinned.at("app"), v("1.0"));
    EXPECT_EQ(p.edges.at({"lib", v("2.0")}).size(), 1u);
    EXPECT_EQ(notes.size(), 1u);

    auto r = solve(p);
    ASSERT_TRUE(r.assignment);
    EXPECT_EQ(r.assignment->at("core"), v("2.0"));
}

TEST_F(BuildProblemTest, DepthLimitStopsExpansion) {
    auto s = store();
    auto p = build_problem(parse_requirements("app==1.0\n"), "app", v("1.0"), s, {1});
    EXPECT_EQ(p.variables.size(), 2u);
    EXPECT_EQ(p.edges.at({"lib", v("1.0")}).size(), 0u);
}

TEST_F(BuildProblemTest, ErrorsForUnknownTargetAndPins) {
    auto s = store();
    EXPECT_THROW(build_problem(parse_requirements("app==1.0\n"), "app", v("9.0"), s), TargetVersionUnknown);
    EXPECT_THROW(build_problem(parse_requirements("app==1.0\n"), "nothing", v("1.0"), s), TargetVersionUnknown);
    EXPECT_THROW(build_problem(parse_requirements("app==1.0\nlib==3.0\n"), "app", v("1.0"), s), UnsatisfiablePin);
    EXPECT_THROW(build_problem(parse_requirements("app==1.0\nmissing==1.0\n"), "app", v("1.0"), s), UnsatisfiablePin);
}

TEST_F(BuildProblemTest, PinnedPrereleaseBecomesCandidate) {
    auto s = store();
    auto p = build_problem(parse_requirements("other==2.0b1\napp==1.0\n"), "app", v("1.0"), s);
    EXPECT_EQ(p.variables.at("other").size(), 2u);
}
