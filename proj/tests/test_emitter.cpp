#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <livegen/emitter.hpp>
#include <livegen/eval.hpp>
#include <livegen/generator.hpp>

#include "support.hpp"

using namespace livegen;

TEST(Emitter, FibonacciText)
{
    const std::string expected = "#include <stdint.h>\n"
                                 "\n"
                                 "int32_t fib(int32_t n_in)\n"
                                 "{\n"
                                 "    int32_t n = n_in;\n"
                                 "    int32_t a;\n"
                                 "    int32_t b;\n"
                                 "    int32_t t;\n"
                                 "    a = 0;\n"
                                 "    b = 1;\n"
                                 "    while ((n > 0)) {\n"
                                 "        t = (a + b);\n"
                                 "        a = b;\n"
                                 "        b = t;\n"
                                 "        n = (n - 1);\n"
                                 "    }\n"
                                 "    return a;\n"
                                 "}\n";
    EXPECT_EQ(emit_function(fixtures::fibonacci()), expected);
}

TEST(Emitter, HeaderCommentAndIndent)
{
    EmitOptions opts;
    opts.header_comment = "seed=1";
    opts.indent_width = 2;
    std::string s = emit_function(fixtures::dead_store(), opts);
    EXPECT_EQ(s.rfind("/* seed=1 */\n#include <stdint.h>\n", 0), 0u);
    EXPECT_NE(s.find("\n  x = a;\n"), std::string::npos);
}

TEST(Emitter, LiteralForms)
{
    using namespace build;
    EXPECT_EQ(emit_expression(*lit(5)), "5");
    EXPECT_EQ(emit_expression(*lit(-5)), "(-5)");
    EXPECT_EQ(emit_expression(*lit(INT32_MIN)), "(-2147483647 - 1)");
    EXPECT_EQ(emit_expression(*lit(7, types::i64)), "((int64_t)7LL)");
    EXPECT_EQ(emit_expression(*lit(INT64_MIN, types::i64)), "((int64_t)(-9223372036854775807LL - 1))");
    EXPECT_EQ(emit_expression(*lit_unsigned(3, types::u32)), "3u");
    EXPECT_EQ(emit_expression(*lit_unsigned(3, types::u64)), "3ull");
    EXPECT_EQ(emit_expression(*lit_unsigned(200, types::u8)), "((uint8_t)200u)");
    EXPECT_EQ(emit_expression(*lit(-4, types::i16)), "((int16_t)(-4))");
    EXPECT_EQ(emit_expression(*lit_float(2.0)), "2.0");
    EXPECT_EQ(emit_expression(*lit_float(0.25, types::f32)), "0.25f");
    EXPECT_EQ(emit_expression(*lit_float(-1.5)), "(-1.5)");
}

TEST(Emitter, FullParenthesization)
{
    using namespace build;
    const Variable x{{"x", 0}, types::i32, VarKind::Local};
    const Variable q{{"q0", 1}, types::i32, VarKind::PointerParam};
    ExprPtr e = binary(BinaryOp::Mul, binary(BinaryOp::Add, ref(x), lit(1)), unary(UnaryOp::Negate, deref(q)));
    EXPECT_EQ(emit_expression(*e), "((x + 1) * (-(*q0)))");
    EXPECT_EQ(emit_expression(*cast(types::f64, ref(x))), "((double)x)");
}

TEST(Emitter, MapReduceLoop)
{
    const Variable acc{{"v0", 0}, types::i32, VarKind::Local};
    const Variable arr{{"arr0", 1}, types::i32, VarKind::ArrayParam};
    const Variable n{{"N", 2}, types::u32, VarKind::Global};
    const Variable i{{"i", 3}, types::u32, VarKind::LoopIndex};
    FunctionDef f;
    f.params = {arr};
    f.locals = {acc, i};
    f.array_size = n;
    f.body = build::block({build::assign(acc, build::lit(0)),
                           build::make({ForMapReduce{acc.id, arr.id, n.id, i.id, BinaryOp::Add,
                                                     build::index(arr, build::ref(i))}}),
                           build::ret(acc)});
    f.return_var = acc.id;
    std::string s = emit_function(f);
    EXPECT_NE(s.find("extern uint32_t N;\n"), std::string::npos);
    EXPECT_NE(s.find("int32_t f(int32_t *arr0)\n"), std::string::npos);
    EXPECT_NE(s.find("    for (unsigned int i = 0; i < N; i++) {\n        v0 = (v0 + arr0[i]);\n    }\n"),
              std::string::npos);
    EXPECT_EQ(s.find("unsigned int i;"), std::string::npos);
}

TEST(Emitter, EmittedSourceCompiles)
{
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("livegen-emitter-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    eval::ToolchainConfig tc = eval::ToolchainConfig::from_env();
    tc.optimization_flags = "-O0 -std=c99 -pedantic-errors";
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg;
        cfg.seed = seed;
        fs::path src = dir / ("f" + std::to_string(seed) + ".c");
        std::ofstream(src) << emit_function(generate_function(cfg));
        EXPECT_NO_THROW(eval::compile_source(src, tc)) << seed;
    }
    fs::path fib = dir / "fib.c";
    std::ofstream(fib) << emit_function(fixtures::fibonacci());
    EXPECT_NO_THROW(eval::compile_source(fib, tc));
    fs::remove_all(dir);
}
