#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "dsol/edits/edits.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/typecheck/typecheck.hpp"
#include "support/corpus.hpp"
#include "support/typecheck_cases.hpp"

using namespace dsol;
using namespace dsol::typecheck;
using types::SolType;
using testsupport::kCases;
using testsupport::RuleCase;
using testsupport::rule_families;
using testsupport::variants;

namespace {

ViolationReport check(const std::string& src) {
    auto unit = frontend::parse_source(src, {.strict = true});
    auto module = frontend::lower_ir(unit);
    EXPECT_TRUE(module.errors.empty());
    return check_unit(module);
}


} // namespace

class RuleCoverage : public ::testing::TestWithParam<RuleCase> {};

TEST_P(RuleCoverage, Judgement) {
    const auto& c = GetParam();
    auto report = check(c.src);
    if (c.accept) {
        EXPECT_TRUE(report.empty()) << report.text();
    } else {
        EXPECT_EQ(report.count(c.rule), 1u) << report.text();
        EXPECT_EQ(report.violations.size(), 1u) << report.text();
    }
}

INSTANTIATE_TEST_SUITE_P(Fig, RuleCoverage, ::testing::ValuesIn(kCases),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(RuleCoverage, EveryRuleAcceptsAndRejects) {
    std::map<Rule, std::pair<int, int>> seen;
    for (const auto& c : kCases) (c.accept ? seen[c.rule].first : seen[c.rule].second)++;
    EXPECT_GE(std::size(kCases), 22u);
    for (auto r : all_rules()) {
        EXPECT_GE(seen[r].first, 1) << rule_name(r);
        EXPECT_GE(seen[r].second, 1) << rule_name(r);
    }
}

TEST(Check, KeccakIntoUintCitesConversion) {
    auto report = check(testsupport::corpus_text("keccak_typed.dsol"));
    ASSERT_EQ(report.violations.size(), 1u);
    const auto& v = report.violations[0];
    EXPECT_EQ(v.rule, Rule::Call);
    EXPECT_EQ(v.expected, "uint256");
    EXPECT_EQ(v.found, "bytes32");
    EXPECT_EQ(v.function, "hashId");
    EXPECT_EQ(v.pos.line, 2);
    EXPECT_EQ(v.statement, "uint256 x = keccak256(varg0);");
    EXPECT_NE(report.text().find("bytes32 cannot be directly converted into uint256"), std::string::npos);
}

TEST(Check, ComparisonYieldsBool) {
    auto unit = frontend::parse_source("function f(uint256 x, uint256 y) public { b = (x < y); }");
    auto module = frontend::lower_ir(unit);
    auto env = TypeEnv::seed(module);
    EXPECT_TRUE(check_unit(module, env).empty());
    EXPECT_EQ(env.lookup("f", "b"), SolType::boolean());
}

TEST(Check, InfersUndeclaredLocals) {
    auto unit = frontend::parse_source(testsupport::corpus_text("keccak_untyped.dsol"));
    auto module = frontend::lower_ir(unit);
    auto env = TypeEnv::seed(module);
    EXPECT_TRUE(check_unit(module, env).empty());
    EXPECT_EQ(env.lookup("hashId", "x"), SolType::fixed_bytes(32));
    EXPECT_EQ(env.lookup("hashId", "msg.sender"), SolType::address());
    EXPECT_FALSE(env.lookup("hashId", "nothing"));
}

TEST(Check, LiteralsAdaptToOperands) {
    EXPECT_TRUE(check("function f(int8 a) public returns (int8) { return a - 5; }").empty());
    EXPECT_EQ(check("function f(int8 a) public returns (int8) { return a - 200; }").count(Rule::Numeric), 1u);
    EXPECT_TRUE(check("function f(bytes1 a) public returns (bool) { return a == 0x00; }").empty());
    EXPECT_TRUE(check("address s;\nfunction f() public { s = 0; }").empty());
    EXPECT_EQ(check("address s;\nfunction f() public { s = 7; }").count(Rule::Constant), 1u);
}

TEST(Check, UnknownNeverViolates) {
    EXPECT_TRUE(check("function f(a, b) public { c = a + b; d = c & b; e = c[a]; g = a && b; h = k(a); }").empty());
}

TEST(Check, VariableCopiesAreNotJudged) {
    EXPECT_TRUE(check("function f(uint256 a) public { uint8 b = a; }").empty());
}

TEST(Report, JsonAndText) {
    auto report = check(testsupport::corpus_text("keccak_typed.dsol"));
    auto json = report.to_json();
    EXPECT_NE(json.find(R"("rule":"Call")"), std::string::npos) << json;
    EXPECT_NE(json.find(R"("count":1)"), std::string::npos) << json;
    EXPECT_EQ(ViolationReport{}.text(), "No type violations.\n");
}

TEST(Report, NewViolationsAreMultisetDifference) {
    Violation a;
    a.rule = Rule::Call;
    a.expected = "uint256";
    a.found = "bytes32";
    Violation b = a;
    b.pos.line = 9;
    Violation c = a;
    c.rule = Rule::Slice;
    ViolationReport base{{a}};
    ViolationReport now{{b, a, c}};
    auto fresh = new_violations(base, now);
    ASSERT_EQ(fresh.violations.size(), 2u);
    EXPECT_EQ(fresh.violations[1].rule, Rule::Slice);
    EXPECT_TRUE(new_violations(now, base).empty());
}

// ---------------------------------------------------------------- properties


TEST(MeetTable, IdempotentAndCommutative) {
    for (const auto& t : variants())
        for (auto f : rule_families()) {
            auto m = types::meet(t, f);
            EXPECT_EQ(types::meet(m, f), m) << t.str() << " " << types::family_set_str(f);
            for (auto g : rule_families())
                EXPECT_EQ(types::meet(types::meet(t, f), g), types::meet(types::meet(t, g), f))
                    << t.str() << " " << types::family_set_str(f) << " " << types::family_set_str(g);
            if (t.is_concrete()) EXPECT_EQ(m.is_bottom(), (t.family() & f) == 0);
        }
    for (const auto& a : variants())
        for (const auto& b : variants()) {
            EXPECT_EQ(types::meet(a, b), types::meet(b, a)) << a.str() << " " << b.str();
            EXPECT_EQ(types::meet(a, a), a) << a.str();
        }
}

namespace {

// Hand-written acceptance table for `z = s OP t` over declared parameters.
bool int_like(const SolType& t) { return t.kind() == types::Kind::Int; }

bool same_numeric(const SolType& a, const SolType& b) {
    return int_like(a) && int_like(b) && a.is_signed() == b.is_signed();
}

bool assignable(const SolType& a, const SolType& b) {
    if (a == b) return true;
    if (same_numeric(a, b)) return true;
    if (a.kind() == types::Kind::Address && b.kind() == types::Kind::Address) return true;
    if (a.kind() == types::Kind::FixedBytes && b.kind() == types::Kind::FixedBytes) return true;
    return false;
}

std::optional<Rule> oracle(const std::string& op, const SolType& a, const SolType& b) {
    using types::Kind;
    auto k = [](const SolType& t) { return t.kind(); };
    if (op == "&&" || op == "||") return k(a) == Kind::Bool && k(b) == Kind::Bool ? std::nullopt : std::optional(Rule::Boolean);
    if (op == "+" || op == "*") return same_numeric(a, b) ? std::nullopt : std::optional(Rule::Numeric);
    if (op == "<<") {
        bool ok = (int_like(a) || k(a) == Kind::Bool) && (int_like(b) || k(b) == Kind::Bool);
        return ok ? std::nullopt : std::optional(Rule::Shift);
    }
    if (op == "&" || op == "^") {
        auto fam = [&](const SolType& t) { return int_like(t) || k(t) == Kind::Bool || k(t) == Kind::FixedBytes; };
        bool ok = fam(a) && fam(b) && assignable(a, b);
        return ok ? std::nullopt : std::optional(Rule::Bitwise);
    }
    if (op == "<") {
        auto fam = [&](const SolType& t) { return int_like(t) || k(t) == Kind::Address || k(t) == Kind::FixedBytes; };
        bool ok = fam(a) && fam(b) && assignable(a, b);
        return ok ? std::nullopt : std::optional(Rule::Compare);
    }
    if (op == "==") return assignable(a, b) ? std::nullopt : std::optional(Rule::Equality);
    return std::nullopt;
}

} // namespace

TEST(Generated, SmallExpressionsMatchOracle) {
    const std::vector<std::string> spellings{"bool", "uint8", "uint256", "int64", "address", "bytes4", "bytes32", "string", "bytes"};
    const std::vector<std::string> ops{"&&", "||", "+", "*", "<<", "&", "^", "<", "=="};
    int checked = 0;
    for (const auto& sa : spellings)
        for (const auto& sb : spellings)
            for (const auto& op : ops) {
                auto src = "function f(" + sa + " s, " + sb + " t) public { z = s " + op + " t; }";
                auto report = check(src);
                auto want = oracle(op, types::parse_type(sa), types::parse_type(sb));
                if (!want) {
                    EXPECT_TRUE(report.empty()) << src << "\n" << report.text();
                } else {
                    EXPECT_FALSE(report.empty()) << src;
                    for (const auto& v : report.violations) EXPECT_EQ(v.rule, *want) << src << "\n" << report.text();
                }
                ++checked;
            }
    EXPECT_EQ(checked, 9 * 9 * 9);
}

TEST(Property, DeterministicAndOrderIndependent) {
    std::mt19937 rng(7);
    for (const auto& path : testsupport::corpus_files()) {
        auto unit = frontend::parse_source(testsupport::slurp(path));
        auto base = check_unit(frontend::lower_ir(unit));
        EXPECT_EQ(check_unit(frontend::lower_ir(unit)).to_json(), base.to_json());
        for (int k = 0; k < 5; ++k) {
            auto shuffled = unit;
            std::shuffle(shuffled.functions.begin(), shuffled.functions.end(), rng);
            EXPECT_EQ(check_unit(frontend::lower_ir(shuffled)).to_json(), base.to_json()) << path;
        }
    }
}

TEST(Property, ViolationFreeEditsKeepOtherViolations) {
    // Retyping a storage variable to any elementary type: when the edit adds no
    // violation, every violation in functions that do not mention it survives.
    const std::vector<std::string> types{"uint8", "uint256", "int256", "address", "bytes32", "bool"};
    int tried = 0;
    for (const auto& path : testsupport::corpus_files()) {
        auto unit = frontend::canonicalize(frontend::parse_source(testsupport::slurp(path)));
        auto module = frontend::lower_ir(unit);
        auto base = check_unit(module);
        for (const auto& slot : module.storage_order)
            for (const auto& t : types) {
                edits::EditSet set;
                set.edits = {edits::Edit::retype(slot, t)};
                auto after = check_unit(frontend::lower_ir(edits::apply_edits(unit, set)));
                if (!new_violations(base, after).empty()) continue;
                auto touched = set.touched_functions(unit);
                ViolationReport untouched;
                for (const auto& v : base.violations)
                    if (std::find(touched.begin(), touched.end(), v.function) == touched.end()) untouched.violations.push_back(v);
                EXPECT_TRUE(new_violations(after, untouched).empty()) << path << " " << slot << ":" << t;
                ++tried;
            }
    }
    EXPECT_GT(tried, 10);
}

TEST(Corpus, BaselineIsClean) {
    for (const auto& path : testsupport::corpus_files()) {
        if (path.filename() == "keccak_typed.dsol") continue;
        auto report = check_unit(frontend::lower_ir(frontend::parse_source(testsupport::slurp(path))));
        EXPECT_TRUE(report.empty()) << path << "\n" << report.text();
    }
}
