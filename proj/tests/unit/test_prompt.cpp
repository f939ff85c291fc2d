#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "dsol/frontend/parser.hpp"
#include "dsol/prompt/prompt.hpp"
#include "support/corpus.hpp"
#include "support/golden.hpp"

using namespace dsol;
using namespace dsol::prompt;

namespace {

struct Unit {
    frontend::SourceUnit unit;
    frontend::IRModule module;
    dg::Analysis analysis;

    explicit Unit(const std::string& text)
        : unit(frontend::parse_source(text)), module(frontend::lower_ir(unit)), analysis(dg::analyze(module)) {}

    PromptBundle bundle(const std::string& id, const PromptOptions& opts = {}) const {
        return build_prompt(unit, module, analysis, OptimizationTarget::parse(id), opts);
    }
};

Unit corpus_unit(const std::string& name) { return Unit(testsupport::corpus_text(name)); }

std::vector<std::string> texts(const std::vector<Sentence>& s) {
    std::vector<std::string> out;
    for (const auto& x : s) out.push_back(x.text);
    return out;
}

bool has_residue(const std::string& s) { return std::regex_search(s, std::regex(R"(\[(NAME|STATEMENT|TYPE|USAGES)\])")); }

} // namespace

TEST(Templates, TwelveRowsWithKnownPlaceholders) {
    const auto& t = TemplateSet::defaults();
    ASSERT_EQ(t.rows().size(), 12u);
    std::set<std::string> rows;
    const std::regex placeholder(R"(\[([A-Z]+)\])");
    for (const auto& r : t.rows()) {
        rows.insert(r.row);
        for (std::sregex_iterator it(r.pattern.begin(), r.pattern.end(), placeholder), end; it != end; ++it) {
            auto name = (*it)[1].str();
            EXPECT_TRUE(name == "NAME" || name == "STATEMENT" || name == "TYPE" || name == "USAGES") << r.row << " " << name;
        }
        std::string filled = fill(r, {{"NAME", {"a", "b"}}, {"STATEMENT", {"x = y", "z = w"}}, {"TYPE", {"uint256"}}, {"USAGES", {"u"}}});
        EXPECT_FALSE(has_residue(filled)) << filled;
    }
    EXPECT_EQ(rows.size(), 12u);
}

TEST(Templates, VariableExpressionPicksAlternativeByRole) {
    const auto& row = TemplateSet::defaults().row("Variable->Expression");
    EXPECT_EQ(fill(row, {{"STATEMENT", {"uintStorage[v0] = varg1"}}, {"TYPE", {"bytes32"}}}, "key"),
              "The key of expression uintStorage[v0] = varg1 is bytes32.");
    EXPECT_EQ(fill(row, {{"STATEMENT", {"x = a + b"}}, {"TYPE", {"uint8"}}}, "operand"),
              "The operand of expression x = a + b is uint8.");
}

TEST(Templates, MalformedDataRejected) {
    EXPECT_THROW(TemplateSet::parse("{}"), dg::DataError);
    EXPECT_THROW(TemplateSet::parse("[1"), dg::DataError);
    EXPECT_THROW(TemplateSet::defaults().row("Nope"), MissingTemplate);
}

TEST(Targets, IdRoundTrip) {
    for (const char* id : {"type:setStorage.v0", "type:uintStorage", "attr:stor_0", "boundary:_handle"})
        EXPECT_EQ(OptimizationTarget::parse(id).id(), id);
    EXPECT_THROW(OptimizationTarget::parse("nope"), InvalidTarget);
    EXPECT_THROW(OptimizationTarget::parse("color:x"), InvalidTarget);
}

TEST(Targets, AttributeNeedsStorage) {
    auto u = corpus_unit("fig1a_storage.dsol");
    EXPECT_THROW(u.bundle("attr:v0"), InvalidTarget);
    EXPECT_THROW(u.bundle("type:setStorage.nothing"), InvalidTarget);
    EXPECT_THROW(u.bundle("boundary:missing"), InvalidTarget);
}

TEST(Candidates, Lists) {
    EXPECT_EQ(candidates_for(TargetKind::ContractAttribute),
              (std::vector<std::string>{"Limit", "Fee", "Flag", "Address", "Asset", "Router", "Others"}));
    auto types = candidates_for(TargetKind::VariableType);
    EXPECT_NE(std::find(types.begin(), types.end(), "address payable"), types.end());
    EXPECT_NE(std::find(types.begin(), types.end(), "bytes32"), types.end());
    EXPECT_NE(std::find(types.begin(), types.end(), "int256"), types.end());
    EXPECT_EQ(std::set<std::string>(types.begin(), types.end()).size(), types.size());
    EXPECT_THROW(candidates_for(TargetKind::FunctionBoundary), UnsupportedKind);
}

TEST(Cot, KeccakSentence) {
    auto u = corpus_unit("fig1a_storage.dsol");
    auto b = u.bundle("type:_getTokenKey.v0");
    ASSERT_FALSE(b.cot.empty());
    EXPECT_EQ(b.cot[0].text,
              "The value of predefined function/operands keccak256 of expression v0 = keccak256(varg0) is type of bytes32");
    EXPECT_EQ(b.cot[0].row, "Type->Expression");
}

TEST(Cot, TypeChainInDependencyOrder) {
    auto u = corpus_unit("fig1a_storage.dsol");
    auto cot = texts(u.bundle("type:_getTokenKey.v0").cot);
    auto at = [&](const std::string& s) {
        auto it = std::find(cot.begin(), cot.end(), s);
        EXPECT_NE(it, cot.end()) << s;
        return it - cot.begin();
    };
    auto d1 = at("The value of predefined function/operands keccak256 of expression v0 = keccak256(varg0) is type of bytes32");
    auto d2 = at("The type of variable v0 is consistent with the type of variable _getTokenKey()");
    auto d3 = at("The type of variable uintStorage is consistent with the type of variable v0");
    EXPECT_LT(d1, d2);
    EXPECT_LT(d2, d3);
}

TEST(Cot, HopOrderIsTotal) {
    for (const auto& p : testsupport::corpus_files()) {
        Unit u(testsupport::slurp(p));
        for (const auto& slot : u.module.storage_order) {
            auto slice = target_slice(u.module, u.analysis.dg, OptimizationTarget::attribute(slot));
            auto cot = render_cot(u.analysis.dg, slice);
            EXPECT_EQ(cot.size(), slice.edges.size());
            for (std::size_t i = 1; i < cot.size(); ++i) {
                const auto& a = cot[i - 1];
                const auto& b = cot[i];
                EXPECT_TRUE(std::tie(a.hop, a.pos, a.edge) < std::tie(b.hop, b.pos, b.edge)) << p;
            }
            for (const auto& s : cot) EXPECT_FALSE(has_residue(s.text));
        }
    }
}

TEST(Cot, WriteSentencesForBankBalance) {
    auto u = corpus_unit("fig1b_bank.dsol");
    auto b = u.bundle("attr:stor_0");
    int writes = 0;
    for (const auto& s : b.cot)
        if (s.row == "State->Expression") {
            ++writes;
            EXPECT_EQ(s.text.substr(s.text.size() - 7), "(Write)");
            EXPECT_EQ(s.text.rfind("The attribute of state variable stor_0 is correlated to the context usages of Expression stor_0[msg.sender] = ", 0), 0u) << s.text;
        }
    EXPECT_EQ(writes, 2);
    EXPECT_EQ(b.candidates.size(), 7u);
}

TEST(Cot, IsolatedNodeGivesNoSentences) {
    dg::DependencyGraph g;
    dg::DGNode n;
    n.key = "x";
    g.add_node(n);
    EXPECT_TRUE(render_cot(g, dg::slice_variable(g, 0)).empty());
}

TEST(Cot, DataFlowEdgeWithoutRowThrows) {
    Unit u("function f(uint256 a) {\n    x = a + 1;\n    y = x * 2;\n}\n");
    auto slice = dg::slice_variable(u.analysis.dg, *u.analysis.dg.find(dg::var_key("f", "x")));
    EXPECT_THROW(render_cot(u.analysis.dg, slice), MissingTemplate);
}

TEST(Context, SingleDefiningStatement) {
    Unit u("function f(uint256 a) {\n    x = 5;\n}\n");
    auto b = u.bundle("type:f.x");
    EXPECT_EQ(b.context, "function f(uint256 a) {\n    x = 5;\n}\n");
    ASSERT_EQ(b.cot.size(), 1u);
    EXPECT_EQ(b.cot[0].text, "The variable of x is assigned from uint8");
}

TEST(Context, TypeSliceStatementsInSourceOrder) {
    auto u = corpus_unit("fig1a_storage.dsol");
    auto b = u.bundle("type:uintStorage");
    EXPECT_EQ(b.context,
              "mapping(uint256=>uint256) uintStorage;\n"
              "\n"
              "function _getTokenKey(bytes varg0) private {\n"
              "    v0 = keccak256(varg0);\n"
              "    return v0;\n"
              "}\n"
              "\n"
              "function setStorage(bytes varg2, uint256 varg1) public {\n"
              "    v0 = _getTokenKey(varg2);\n"
              "    uintStorage[v0] = varg1;\n"
              "}\n"
              "\n"
              "function getStorage(bytes varg0) public view returns (uint256) {\n"
              "    v0 = _getTokenKey(varg0);\n"
              "    return uintStorage[v0];\n"
              "}\n");
}

TEST(Context, EmptySliceThrows) {
    Unit u("uint256 stor_x;\nfunction f() {}\n");
    EXPECT_THROW(u.bundle("type:stor_x"), EmptySlice);
}

TEST(Boundary, HandleBundle) {
    auto u = corpus_unit("fig1c_handle.dsol");
    auto b = u.bundle("boundary:_handle");
    EXPECT_TRUE(b.candidates.empty());
    std::set<std::string> rows;
    for (const auto& s : b.cot) rows.insert(s.row);
    EXPECT_TRUE(rows.count("Return Value"));
    EXPECT_TRUE(rows.count("Variable Declaration"));
    EXPECT_EQ(b.text().find("## Inference Candidates"), std::string::npos);
    EXPECT_NE(b.context.find("   4 | function _handle(uint256 varg0, uint256 varg1) public returns (bool) {"), std::string::npos)
        << b.context;
    EXPECT_NE(std::find(texts(b.cot).begin(), texts(b.cot).end(),
                        "Expression bool v0 = varg1 > stor_1 is used to declare the variable. Please determine whether it is the start point."),
              texts(b.cot).end());
}

TEST(Boundary, SharedRequirePrefixIsModifier) {
    auto u = corpus_unit("rows.dsol");
    auto b = u.bundle("boundary:bump");
    auto t = texts(b.cot);
    EXPECT_NE(std::find(t.begin(), t.end(),
                        "Expressions with a range from require(msg.sender == stor_owner) to require(msg.sender == stor_owner) "
                        "seems to be a modifier function."),
              t.end());
    EXPECT_NE(std::find(t.begin(), t.end(), "Expression v1 = _scale(v0) seems to be a call site to another function."), t.end());
}

TEST(Bundle, SectionOrderAndDeterminism) {
    auto u = corpus_unit("fig1a_storage.dsol");
    auto a = u.bundle("type:_getTokenKey.v0");
    auto b = u.bundle("type:_getTokenKey.v0");
    EXPECT_EQ(a.text(), b.text());
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_EQ(a.hash(), b.hash());
    auto text = a.text();
    std::vector<std::string> order{"## Instruction", "## Target", "## Code Context", "## Inference Candidates",
                                   "## Chain-of-Thought", "## Output Format"};
    std::size_t last = 0;
    for (const auto& h : order) {
        auto at = text.find(h);
        ASSERT_NE(at, std::string::npos) << h;
        EXPECT_GE(at, last);
        last = at;
    }
    EXPECT_EQ(text.find("## Feedback"), std::string::npos);
    auto fb = u.bundle("type:_getTokenKey.v0", {.feedback = "line 4: Call rule"});
    EXPECT_LT(fb.text().find("## Feedback"), fb.text().find("## Output Format"));
    EXPECT_NE(fb.hash(), a.hash());
}

TEST(Bundle, BudgetDropsHighestHopSentencesFirst) {
    auto u = corpus_unit("fig1a_storage.dsol");
    auto full = u.bundle("type:_getTokenKey.v0", {.token_budget = 1000000});
    ASSERT_GT(full.cot.size(), 2u);
    std::size_t budget = full.token_estimate() - 10;
    auto cut = u.bundle("type:_getTokenKey.v0", {.token_budget = budget});
    EXPECT_GT(cut.dropped, 0u);
    EXPECT_EQ(cut.context, full.context);
    EXPECT_LE(cut.token_estimate(), budget);
    ASSERT_EQ(cut.cot.size() + cut.dropped, full.cot.size());
    for (std::size_t i = 0; i < cut.cot.size(); ++i) EXPECT_EQ(cut.cot[i].text, full.cot[i].text);
    auto tiny = u.bundle("type:_getTokenKey.v0", {.token_budget = 1});
    EXPECT_TRUE(tiny.cot.empty());
    EXPECT_EQ(tiny.context, full.context);
}

TEST(Hash, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc");
}

TEST(Golden, BundlesMatchSnapshots) {
    for (const auto& [file, target] : testsupport::golden_targets()) {
        auto b = testsupport::golden_bundle(file, target);
        EXPECT_TRUE(testsupport::matches_golden(testsupport::golden_path(file, target, ".txt"), b.text())) << file << " " << target;
        EXPECT_TRUE(testsupport::matches_golden(testsupport::golden_path(file, target, ".json"), b.to_json() + "\n"))
            << file << " " << target;
    }
}

TEST(Golden, SnapshotsCoverEveryTemplateRow) {
    std::set<std::string> rows;
    for (const auto& [file, target] : testsupport::golden_targets())
        for (const auto& s : testsupport::golden_bundle(file, target).cot) rows.insert(s.row);
    for (const auto& r : TemplateSet::defaults().rows()) EXPECT_TRUE(rows.count(r.row)) << r.row;
}
