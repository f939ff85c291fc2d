#include <gtest/gtest.h>

#include "dsol/edits/edits.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/frontend/render.hpp"
#include "support/corpus.hpp"

using namespace dsol;
using namespace dsol::edits;
using frontend::canonicalize;
using frontend::render_unit;

namespace {

frontend::SourceUnit corpus(const std::string& name) { return frontend::parse_source(testsupport::corpus_text(name)); }

EditSet set_of(std::vector<Edit> edits, std::string scope = {}) {
    EditSet s;
    s.edits = std::move(edits);
    s.scope = std::move(scope);
    return s;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

} // namespace

TEST(Apply, EmptySetIsIdentity) {
    for (const auto& path : testsupport::corpus_files()) {
        auto unit = frontend::parse_source(testsupport::slurp(path));
        EXPECT_EQ(render_unit(apply_edits(unit, {})), render_unit(canonicalize(unit))) << path;
    }
}

TEST(Apply, AttributeOnStorage) {
    auto out = apply_edits(corpus("fig1b_bank.dsol"), set_of({Edit::attribute("stor_0", "Asset")}));
    ASSERT_TRUE(out.find_storage("stor_0")->attribute);
    EXPECT_EQ(*out.find_storage("stor_0")->attribute, "Asset");
    EXPECT_TRUE(contains(render_unit(out), "// attribute: Asset"));
}

TEST(Apply, AttributeRejectsUnknownLabelOrSlot) {
    auto unit = corpus("fig1b_bank.dsol");
    EXPECT_THROW(apply_edits(unit, set_of({Edit::attribute("stor_0", "Money")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::attribute("stor_9", "Asset")})), EditConflict);
}

TEST(Apply, RetypeStorageAndLocals) {
    auto out = apply_edits(corpus("fig1c_handle.dsol"), set_of({Edit::retype("stor_1", "uint128")}));
    EXPECT_EQ(out.find_storage("stor_1")->type.str(), "uint128");

    auto unit = frontend::parse_source("function f(uint256 varg0) public { v0 = varg0 + 1; v0 = v0 * 2; }");
    auto typed = apply_edits(unit, set_of({Edit::retype("v0", "uint64")}, "f"));
    auto text = render_unit(typed);
    EXPECT_TRUE(contains(text, "uint64 v0 = varg0 + 1;")) << text;
    EXPECT_TRUE(contains(text, "    v0 = v0 * 2;")) << text;

    auto param = apply_edits(unit, set_of({Edit::retype("varg0", "address", "f")}));
    EXPECT_TRUE(contains(render_unit(param), "function f(address varg0)"));
}

TEST(Apply, RetypeDeclaresSyntheticSlot) {
    auto unit = frontend::parse_source("function f() public { stor_3 = 1; }");
    auto out = apply_edits(unit, set_of({Edit::retype("stor_3", "uint8")}));
    ASSERT_NE(out.find_storage("stor_3"), nullptr);
    EXPECT_EQ(out.find_storage("stor_3")->type.str(), "uint8");
}

TEST(Apply, RetypeConflicts) {
    auto unit = corpus("fig1c_handle.dsol");
    EXPECT_THROW(apply_edits(unit, set_of({Edit::retype("nothing", "uint8", "_handle")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::retype("v0", "uint7", "_handle")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::retype("v0", "bool", "missing")})), EditConflict);
}

TEST(Apply, RenameWithinFunction) {
    auto out = apply_edits(corpus("fig1c_handle.dsol"),
                           set_of({Edit::rename("varg0", "amount", "_handle"), Edit::rename("v0", "ok", "_handle")}));
    auto text = render_unit(out);
    EXPECT_TRUE(contains(text, "function _handle(uint256 amount, uint256 varg1)")) << text;
    EXPECT_TRUE(contains(text, "stor_1 = stor_1 + amount;")) << text;
    EXPECT_TRUE(contains(text, "return ok;")) << text;
}

TEST(Apply, RenameStorageEverywhere) {
    auto text = render_unit(apply_edits(corpus("fig1b_bank.dsol"), set_of({Edit::rename("stor_0", "balances")})));
    EXPECT_FALSE(contains(text, "stor_0")) << text;
    EXPECT_TRUE(contains(text, "return balances[varg0];")) << text;
}

TEST(Apply, RenameClashIsConflict) {
    auto unit = corpus("fig1c_handle.dsol");
    EXPECT_THROW(apply_edits(unit, set_of({Edit::rename("varg0", "varg1", "_handle")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::rename("varg0", "stor_1", "_handle")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::rename("varg0", "total", "_handle")})), EditConflict);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::rename("varg0", "1x", "_handle")})), EditConflict);
}

TEST(Split, SingleStatement) {
    auto out = apply_edits(corpus("fig1c_handle.dsol"), set_of({Edit::split("_handle", "_accumulate", 6, 6)}));
    EXPECT_TRUE(out.skips.empty());
    const auto* fresh = out.find_function("_accumulate");
    ASSERT_NE(fresh, nullptr);
    ASSERT_EQ(fresh->params.size(), 1u);
    EXPECT_EQ(fresh->params[0].name, "varg0");
    EXPECT_EQ(fresh->params[0].type->str(), "uint256");
    EXPECT_EQ(fresh->modifiers, std::vector<std::string>{"private"});
    auto text = render_unit(out);
    EXPECT_TRUE(contains(text, "    _accumulate(varg0);\n")) << text;
    EXPECT_LT(text.find("function _accumulate"), text.find("function _handle"));
}

TEST(Split, TailWithReturn) {
    auto out = apply_edits(corpus("fig1c_handle.dsol"), set_of({Edit::split("_handle", "_tail", 6, 8)}));
    const auto* fresh = out.find_function("_tail");
    ASSERT_NE(fresh, nullptr);
    EXPECT_TRUE(fresh->has_returns);
    ASSERT_EQ(fresh->params.size(), 2u);
    EXPECT_TRUE(contains(render_unit(out), "return _tail(varg0, varg1);"));
}

TEST(Split, LocalsCarriedAsParams) {
    auto unit = frontend::parse_source(
        "function f(uint256 varg0) public {\n    uint8 v0 = 3;\n    v1 = v0 + varg0;\n    stor_2 = v1;\n}\n");
    auto out = apply_edits(unit, set_of({Edit::split("f", "g", 3, 4)}));
    const auto* g = out.find_function("g");
    ASSERT_NE(g, nullptr);
    ASSERT_EQ(g->params.size(), 2u);
    EXPECT_EQ(g->params[0].name, "varg0");
    EXPECT_EQ(g->params[1].name, "v0");
    EXPECT_EQ(g->params[1].type->str(), "uint8");
}

TEST(Split, Conflicts) {
    auto unit = corpus("fig1c_handle.dsol");
    auto bad = [&](std::vector<Edit> e) { EXPECT_THROW(apply_edits(unit, set_of(std::move(e))), EditConflict); };
    bad({Edit::split("_handle", "_x", 7, 7)});                                   // v0 used by the return
    bad({Edit::split("_handle", "_x", 4, 6)});                                   // header line
    bad({Edit::split("_handle", "_x", 5, 7)});                                   // return outside the range
    bad({Edit::split("_handle", "total", 6, 6)});                                // name taken
    bad({Edit::split("nope", "_x", 6, 6)});                                      // no host
    bad({Edit::split("_handle", "_x", 5, 6), Edit::split("_handle", "_y", 6, 6)}); // overlap
    bad({Edit::split("_handle", "_x", 5, 5), Edit::split("total", "_x", 12, 12)}); // duplicate new name
}

TEST(Split, TwoDisjointRanges) {
    auto out = apply_edits(corpus("fig1c_handle.dsol"),
                           set_of({Edit::split("_handle", "_auth", 5, 5), Edit::split("_handle", "_acc", 6, 6)}));
    const auto* host = out.find_function("_handle");
    ASSERT_EQ(host->body.size(), 4u);
    EXPECT_NE(out.find_function("_auth"), nullptr);
    EXPECT_NE(out.find_function("_acc"), nullptr);
}

TEST(Split, BlockStatementSpansLines) {
    auto unit = canonicalize("function f(uint256 varg0) public {\n    if (varg0 > 1) {\n        stor_1 = varg0;\n    }\n    stor_2 = 2;\n}\n");
    auto lines = statement_lines(unit.functions[0]);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0].first, 2);
    EXPECT_EQ(lines[0].last, 4);
    EXPECT_EQ(lines[1].first, 5);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::split("f", "g", 2, 3)})), EditConflict);
    EXPECT_NO_THROW(apply_edits(unit, set_of({Edit::split("f", "g", 2, 4)})));
}

TEST(Apply, FailureLeavesInputUntouched) {
    auto unit = corpus("fig1b_bank.dsol");
    auto before = render_unit(unit);
    EXPECT_THROW(apply_edits(unit, set_of({Edit::attribute("stor_0", "Asset"), Edit::retype("nothing", "uint8")})),
                 EditConflict);
    EXPECT_EQ(render_unit(unit), before);
}

TEST(Touched, FunctionsAffectedByCodeEdits) {
    auto unit = corpus("fig1c_handle.dsol");
    EXPECT_TRUE(set_of({Edit::attribute("stor_1", "Limit")}).touched_functions(unit).empty());
    EXPECT_FALSE(set_of({Edit::attribute("stor_1", "Limit")}).touches_code());
    EXPECT_EQ(set_of({Edit::retype("stor_1", "uint128")}).touched_functions(unit),
              (std::vector<std::string>{"_handle", "total"}));
    EXPECT_EQ(set_of({Edit::split("_handle", "_a", 6, 6)}).touched_functions(unit),
              (std::vector<std::string>{"_a", "_handle"}));
}

TEST(Json, RoundTrip) {
    std::vector<Edit> edits{Edit::retype("v0", "bytes32", "f"), Edit::attribute("stor_0", "Asset"),
                            Edit::split("_handle", "_x", 5, 6), Edit::rename("varg0", "amount")};
    auto text = edits_to_json(edits);
    EXPECT_EQ(edits_from_json(text), edits);
    EXPECT_TRUE(contains(text, R"({"op":"retype","name":"v0","type":"bytes32","function":"f"})")) << text;
    EXPECT_TRUE(contains(text, R"({"op":"rename","old":"varg0","new":"amount"})")) << text;
}

TEST(Json, SingleObjectAccepted) {
    auto edits = edits_from_json(R"({"op":"attribute","name":"stor_0","label":"Fee"})");
    ASSERT_EQ(edits.size(), 1u);
    EXPECT_EQ(edits[0], Edit::attribute("stor_0", "Fee"));
}

TEST(Json, Malformed) {
    EXPECT_THROW(edits_from_json("not json"), InvalidEdit);
    EXPECT_THROW(edits_from_json("[{\"op\":\"delete\"}]"), InvalidEdit);
    EXPECT_THROW(edits_from_json("[{\"op\":\"retype\",\"name\":\"x\"}]"), InvalidEdit);
    EXPECT_THROW(edits_from_json("[{\"op\":\"split\",\"host\":\"f\",\"new_name\":\"g\",\"start_line\":\"a\",\"end_line\":2}]"),
                 InvalidEdit);
    EXPECT_THROW(edits_from_json("42"), InvalidEdit);
}

TEST(Diff, RecoversRetypes) {
    auto unit = frontend::parse_source(testsupport::corpus_text("fig1a_storage.dsol"));
    auto text = render_unit(canonicalize(unit));
    auto pos = text.find("v0 = keccak256");
    ASSERT_NE(pos, std::string::npos);
    text.insert(pos, "bytes32 ");
    auto set = diff_edits(unit, text, "_getTokenKey");
    ASSERT_EQ(set.edits.size(), 1u);
    EXPECT_EQ(set.edits[0], Edit::retype("v0", "bytes32", "_getTokenKey"));
    EXPECT_NO_THROW(apply_edits(unit, set));
}

TEST(Diff, RecoversSplitFromRewrite) {
    auto unit = corpus("fig1c_handle.dsol");
    auto expected = apply_edits(unit, set_of({Edit::split("_handle", "_accumulate", 6, 6)}));
    auto set = diff_edits(unit, render_unit(expected), "_handle");
    ASSERT_EQ(set.edits.size(), 1u);
    EXPECT_EQ(set.edits[0], Edit::split("_handle", "_accumulate", 6, 6));
    EXPECT_EQ(render_unit(apply_edits(unit, set)), render_unit(expected));
}

TEST(Diff, NumberedSnippetAndGarbage) {
    auto unit = corpus("fig1c_handle.dsol");
    std::string snippet = "   4 | function _handle(uint256 varg0, uint256 varg1) public returns (bool) {\n"
                          "   5 |     require(msg.sender == stor_owner);\n"
                          "   6 |     stor_1 = stor_1 + varg0;\n"
                          "   7 |     bool v0 = varg1 > stor_1;\n"
                          "   8 |     return v0;\n"
                          "   9 | }\n";
    EXPECT_TRUE(diff_edits(unit, snippet, "_handle").empty());
    EXPECT_TRUE(diff_edits(unit, "}}} nonsense {{{", "_handle").empty());
    auto renamed = diff_edits(unit, "function _handle(uint256 amount, uint256 varg1) public returns (bool) {}", "_handle");
    ASSERT_EQ(renamed.edits.size(), 1u);
    EXPECT_EQ(renamed.edits[0], Edit::rename("varg0", "amount", "_handle"));
}

TEST(Property, RandomSplitsReparseOrConflict) {
    // Every top-level statement range either splits into a unit that re-parses
    // strictly with one more function, or is refused with EditConflict.
    for (const auto& path : testsupport::corpus_files()) {
        auto unit = canonicalize(frontend::parse_source(testsupport::slurp(path)));
        for (const auto& fn : unit.functions) {
            auto lines = statement_lines(fn);
            for (std::size_t i = 0; i < lines.size(); ++i)
                for (std::size_t j = i; j < lines.size(); ++j) {
                    try {
                        auto out = apply_edits(unit, set_of({Edit::split(fn.name, "__part", lines[i].first, lines[j].last)}));
                        EXPECT_EQ(out.functions.size(), unit.functions.size() + 1);
                        EXPECT_TRUE(out.skips.empty());
                        auto again = canonicalize(render_unit(out));
                        EXPECT_EQ(render_unit(again), render_unit(out));
                    } catch (const EditConflict&) {
                    }
                }
        }
    }
}
