#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/frontend/ast.hpp"
#include "dsol/util/word.hpp"

namespace dsol::frontend {

class LoweringError : public std::runtime_error {
public:
    LoweringError(std::string function, SourcePos pos, const std::string& message);

    const std::string& function() const { return function_; }
    SourcePos pos() const { return pos_; }

private:
    std::string function_;
    SourcePos pos_;
};

enum class ValueKind : std::uint8_t {
    Var,   // parameter, local, or environment value such as msg.sender
    Temp,  // t0, t1, ...
    Const, // numeric literal, value holds the word
    Bool,  // true / false
    Str,   // string literal, name holds the body
};

struct IRValue {
    ValueKind kind = ValueKind::Var;
    std::string name; // variable/temp name, or the literal spelling
    Word value = 0;   // Const / Bool
    bool hex = false; // Const written in hex

    static IRValue var(std::string name);
    static IRValue temp(std::string name);
    static IRValue constant(const std::string& spelling);
    static IRValue boolean(bool b);
    static IRValue str(std::string body);

    bool is_named() const { return kind == ValueKind::Var || kind == ValueKind::Temp; }
    bool is_literal() const { return !is_named(); }
    std::string str() const;

    friend bool operator==(const IRValue& a, const IRValue& b) {
        return a.kind == b.kind && a.name == b.name;
    }
};

/// Environment values (msg.sender, block.timestamp, now, this) are Var operands
/// that are never defined inside a function.
bool is_env_name(const std::string& name);

enum class Opcode : std::uint8_t {
    Copy,         // dest = a
    Binop,        // dest = a <opname> b
    Unop,         // dest = <opname> a
    Call,         // dest = opname(args); method calls carry the receiver as operand 0
    LoadStorage,  // dest = opname[k0][k1]...
    StoreStorage, // opname[k0]... = operands.back()
    Index,        // dest = a[b]
    Member,       // dest = a.opname
    Tuple,        // dest = (a, b, ...)
    Array,        // dest = [a, b, ...]
    Slice,        // dest = a[b:c]
    Require,      // require a
    Ret,          // ret a, b, ...
    Branch,       // branch a ? targets[0] : targets[1]
    Jump,         // jump targets[0]
    Label,        // opname:
};

const char* opcode_name(Opcode op);
bool is_terminator(Opcode op);

struct IRInstr {
    std::optional<IRValue> dest;
    Opcode op = Opcode::Copy;
    std::string opname;
    std::vector<IRValue> operands;
    std::vector<std::string> targets;
    SourcePos pos;
    int stmt = -1;       // index into IRFunction::stmts
    bool method = false; // Call: operands[0] is the receiver
    bool emit = false;   // Call: emitted event

    std::string str() const;
};

/// Statement attribution for IR instructions, in preorder.
struct StmtInfo {
    StmtKind kind = StmtKind::ExprStmt;
    SourcePos pos;
    std::string text; // canonical one-line rendering
    int depth = 0;    // nesting depth, 0 for top-level statements
};

struct IRFunction {
    std::string name;
    std::vector<std::string> params;
    std::vector<std::optional<types::SolType>> param_types;
    std::vector<types::SolType> returns;
    std::map<std::string, types::SolType> local_types; // VarDecl declarations
    std::vector<IRInstr> instrs;
    std::vector<StmtInfo> stmts;
    Span span;
    SourcePos pos;
    int temp_count = 0;

    bool is_param(const std::string& name) const;
    std::string str() const;
};

struct IRModule {
    std::string file_id;
    std::vector<IRFunction> functions;
    std::vector<std::string> storage_order;           // declared first, then synthetic in first-use order
    std::map<std::string, types::SolType> storage;    // Unknown for undeclared slots
    std::map<std::string, SourcePos> storage_pos;     // declaration, or first use when undeclared
    std::vector<LoweringError> errors;                // functions that could not be lowered

    const IRFunction* find(const std::string& name) const;
    bool has_function(const std::string& name) const { return find(name) != nullptr; }
    bool is_storage(const std::string& name) const { return storage.count(name) != 0; }
};

/// Lowers every function. A function with an unsupported construct is left out
/// and its LoweringError recorded; lower_function throws instead.
IRModule lower_ir(const SourceUnit& unit);
IRFunction lower_function(const SourceUnit& unit, const FunctionDecl& fn);

} // namespace dsol::frontend
