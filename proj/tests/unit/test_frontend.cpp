#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dsol/frontend/ir.hpp"
#include "dsol/frontend/lexer.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/frontend/render.hpp"

using namespace dsol::frontend;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> corpus_files() {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(DSOL_CORPUS_DIR))
        if (e.path().extension() == ".dsol") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ir_lines(const IRFunction& fn) {
    std::vector<std::string> out;
    for (const auto& in : fn.instrs) out.push_back(in.str());
    return out;
}

IRFunction lower_one(const std::string& text) {
    auto unit = parse_source(text, {.strict = true});
    return lower_function(unit, unit.functions.at(0));
}

} // namespace

TEST(Tokenize, TypedDeclaration) {
    auto toks = tokenize("uint256 v0 = 1");
    ASSERT_EQ(toks.size(), 4u);
    EXPECT_EQ(toks[0].kind, TokenKind::Type);
    EXPECT_EQ(toks[0].text, "uint256");
    EXPECT_EQ(toks[1].kind, TokenKind::Ident);
    EXPECT_TRUE(toks[2].is_op("="));
    EXPECT_EQ(toks[3].kind, TokenKind::Int);
}

TEST(Tokenize, CompoundAssignRoundTrips) {
    auto toks = tokenize("stor_0 -= varg1");
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[0].kind, TokenKind::Ident);
    EXPECT_TRUE(toks[1].is_op("-="));
    EXPECT_EQ(toks[2].text, "varg1");
    EXPECT_EQ(join_tokens(toks), "stor_0 -= varg1");
    EXPECT_EQ(join_tokens(tokenize(join_tokens(toks))), join_tokens(toks));
}

TEST(Tokenize, EmptyAndErrors) {
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("  // only a comment\n /* block */ ").empty());
    auto toks = tokenize("a @ b");
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[1].kind, TokenKind::Error);
    EXPECT_EQ(toks[1].pos.line, 1);
    EXPECT_EQ(toks[1].pos.col, 3);
}

TEST(Tokenize, AttributeAnnotation) {
    auto toks = tokenize("uint256 stor_0; // attribute: Asset\n");
    ASSERT_EQ(toks.back().kind, TokenKind::Annotation);
    EXPECT_EQ(toks.back().text, "Asset");
}

TEST(Parse, AssignCallThenStorageWrite) {
    auto unit = parse_source(
        "mapping(uint256 => uint256) uintStorage;\n"
        "function setStorage(bytes varg2, uint256 varg1) public {\n"
        "    v0 = _getTokenKey(varg2);\n"
        "    uintStorage[v0] = varg1;\n"
        "}\n");
    ASSERT_EQ(unit.functions.size(), 1u);
    const auto& body = unit.functions[0].body;
    ASSERT_EQ(body.size(), 2u);
    EXPECT_EQ(body[0].kind, StmtKind::Assign);
    EXPECT_EQ(body[0].rhs().kind, ExprKind::Call);
    EXPECT_EQ(body[1].kind, StmtKind::StorageWrite);
    EXPECT_EQ(body[1].lhs().kind, ExprKind::Index);
}

TEST(Parse, EmptyFunction) {
    auto unit = parse_source("function f() {}");
    ASSERT_EQ(unit.functions.size(), 1u);
    EXPECT_EQ(unit.functions[0].name, "f");
    EXPECT_TRUE(unit.functions[0].params.empty());
    EXPECT_TRUE(unit.functions[0].body.empty());
}

TEST(Parse, StrayTokenSkipsOneFunction) {
    auto unit = parse_source(
        "function a() {\n    return 1;\n}\n"
        "function b() {\n    x = 1 1;\n}\n"
        "function c() {\n    return 2;\n}\n");
    ASSERT_EQ(unit.functions.size(), 2u);
    EXPECT_EQ(unit.functions[0].name, "a");
    EXPECT_EQ(unit.functions[1].name, "c");
    ASSERT_EQ(unit.skips.size(), 1u);
    EXPECT_EQ(unit.skips[0].function, "b");
}

TEST(Parse, StrictModeThrows) {
    EXPECT_THROW(parse_source("function b() {\n    x = 1 1;\n}\n", {.strict = true}), SyntaxError);
}

TEST(Parse, DuplicateNamesRejected) {
    EXPECT_THROW(parse_source("function f() {}\nfunction f() {}\n"), SyntaxError);
}

TEST(Parse, AssemblyIsSkipped) {
    auto unit = parse_source("function f() {\n    assembly { mstore(0, 1) }\n}\nfunction g() {}\n");
    ASSERT_EQ(unit.functions.size(), 1u);
    ASSERT_EQ(unit.skips.size(), 1u);
    EXPECT_EQ(unit.skips[0].function, "f");
}

TEST(Parse, SyntaxErrorCarriesExpectedSet) {
    try {
        parse_source("uint256 x\n");
        FAIL();
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.pos().line, 1);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(Parse, ExpressionsCarryPositionsAndClasses) {
    auto unit = parse_source("function f(uint256 a) {\n    b = (a + 1) * 2 < 3 && !c;\n}\n");
    int visited = 0;
    for_each_stmt(unit.functions[0].body, [&](const Stmt& s) {
        for (const auto& e : s.exprs)
            for_each_expr(e, [&](const Expr& x) {
                ++visited;
                EXPECT_GT(x.pos.line, 0);
            });
    });
    EXPECT_GT(visited, 5);
    EXPECT_EQ(op_class("&&"), OpClass::Blop);
    EXPECT_EQ(op_class("*"), OpClass::Numop);
    EXPECT_EQ(op_class("<="), OpClass::Cmpop);
    EXPECT_EQ(op_class("^"), OpClass::Bitop);
}

TEST(Render, PrecedenceParens) {
    auto unit = parse_source("function f() {\n    x = (a + b) * c;\n    y = a + (b * c);\n    z = a - (b - c);\n}\n");
    auto text = render_unit(unit);
    EXPECT_NE(text.find("x = (a + b) * c;"), std::string::npos);
    EXPECT_NE(text.find("y = a + b * c;"), std::string::npos);
    EXPECT_NE(text.find("z = a - (b - c);"), std::string::npos);
}

TEST(Render, ElseIfChain) {
    const std::string src =
        "function f(uint256 varg0) {\n"
        "    if (varg0 == 1) {\n"
        "        return 1;\n"
        "    } else if (varg0 == 2) {\n"
        "        return 2;\n"
        "    } else {\n"
        "        return 3;\n"
        "    }\n"
        "}\n";
    EXPECT_EQ(render_unit(parse_source(src)), src);
}

TEST(Render, CorpusRoundTrip) {
    auto files = corpus_files();
    ASSERT_FALSE(files.empty());
    for (const auto& p : files) {
        auto once = render_unit(parse_source(slurp(p)));
        auto twice = render_unit(parse_source(once));
        EXPECT_EQ(once, twice) << p;
    }
}

TEST(Canonicalize, PositionsAreCanonicalLines) {
    auto unit = canonicalize("function f() { x = 1; y = 2; }");
    ASSERT_EQ(unit.functions[0].body.size(), 2u);
    EXPECT_EQ(unit.functions[0].body[0].pos.line, 2);
    EXPECT_EQ(unit.functions[0].body[1].pos.line, 3);
    EXPECT_EQ(unit.functions[0].span.start_line, 1);
    EXPECT_EQ(unit.functions[0].span.end_line, 4);
}

TEST(Lower, ThreeAddressSplit) {
    auto fn = lower_one("function f(uint256 a, uint256 b, uint256 c) {\n    x = a + b * c;\n}\n");
    EXPECT_EQ(ir_lines(fn), (std::vector<std::string>{"t0 = b * c", "x = a + t0"}));
}

TEST(Lower, RequireWithStorageLoad) {
    // Hand-lowered: the load is the first temp, the comparison the second.
    auto fn = lower_one("address stor_owner;\nfunction f() {\n    require(msg.sender == stor_owner);\n}\n");
    ASSERT_EQ(fn.instrs.size(), 3u);
    EXPECT_EQ(fn.instrs[0].op, Opcode::LoadStorage);
    EXPECT_EQ(fn.instrs[0].opname, "stor_owner");
    EXPECT_EQ(fn.instrs[0].dest->name, "t0");
    EXPECT_EQ(fn.instrs[1].op, Opcode::Binop);
    EXPECT_EQ(fn.instrs[1].opname, "==");
    EXPECT_EQ(fn.instrs[1].operands[0].name, "msg.sender");
    EXPECT_EQ(fn.instrs[1].operands[1].name, "t0");
    EXPECT_EQ(fn.instrs[1].dest->name, "t1");
    EXPECT_EQ(fn.instrs[2].op, Opcode::Require);
    EXPECT_EQ(fn.instrs[2].operands[0].name, "t1");
}

TEST(Lower, ReturnIsTerminator) {
    auto fn = lower_one("function f() {\n    return v9;\n}\n");
    ASSERT_EQ(fn.instrs.size(), 1u);
    EXPECT_EQ(fn.instrs[0].str(), "ret v9");
    EXPECT_TRUE(is_terminator(fn.instrs[0].op));
}

TEST(Lower, StorageWritesAndCompound) {
    auto fn = lower_one("function f(uint256 varg1) {\n    stor_0 -= varg1;\n    stor_m[varg1] = 1;\n}\n");
    EXPECT_EQ(ir_lines(fn), (std::vector<std::string>{"t0 = load_storage stor_0", "t1 = t0 - varg1",
                                                      "store_storage stor_0 = t1", "store_storage stor_m[varg1] = 1"}));
}

TEST(Lower, LocalIndexWriteIsExplicitError) {
    auto unit = parse_source("function f(uint256[] a) {\n    a[0] = 1;\n}\nfunction g() {}\n");
    EXPECT_THROW(lower_function(unit, unit.functions[0]), LoweringError);
    auto m = lower_ir(unit);
    EXPECT_EQ(m.functions.size(), 1u);
    EXPECT_EQ(m.errors.size(), 1u);
}

TEST(Lower, CorpusInvariants) {
    for (const auto& p : corpus_files()) {
        auto unit = parse_source(slurp(p));
        auto m = lower_ir(unit);
        for (const auto& fn : m.functions) {
            const auto* decl = unit.find_function(fn.name);
            ASSERT_NE(decl, nullptr);
            std::size_t stmts = 0;
            for_each_stmt(decl->body, [&](const Stmt&) { ++stmts; });
            if (stmts > 0) EXPECT_GE(fn.instrs.size(), stmts) << p << " " << fn.name;
            std::set<std::string> temps;
            for (const auto& in : fn.instrs) {
                if (in.dest && in.dest->kind == ValueKind::Temp) EXPECT_TRUE(temps.insert(in.dest->name).second);
                EXPECT_LE(in.dest ? 1 : 0, 1);
            }
            // branch/jump targets name existing labels
            std::set<std::string> labels;
            for (const auto& in : fn.instrs)
                if (in.op == Opcode::Label) labels.insert(in.opname);
            for (const auto& in : fn.instrs)
                for (const auto& t : in.targets) EXPECT_TRUE(labels.count(t)) << t;
        }
    }
}

TEST(SourceUnit, SpansOrderedAndDisjoint) {
    for (const auto& p : corpus_files()) {
        auto unit = parse_source(slurp(p));
        int last = 0;
        int lines = static_cast<int>(std::count(unit.text.begin(), unit.text.end(), '\n')) + 1;
        for (const auto& fn : unit.functions) {
            EXPECT_LE(fn.span.start_line, fn.span.end_line);
            EXPECT_GT(fn.span.start_line, last) << p;
            EXPECT_LE(fn.span.end_line, lines);
            last = fn.span.end_line;
        }
    }
}
