#pragma once

// Desk-scale evaluation: compile generated files with an external
// toolchain, count the instructions and distinct opcodes the disassembler
// lists, and summarize min / median / max / total per metric.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace livegen::eval {

namespace fs = std::filesystem;

class EvalError : public std::runtime_error {
public:
    enum class Kind { CompileFailure, Timeout, DisassembleFailure, EmptyInput, BadConfig, Io };

    EvalError(Kind kind, const std::string& what, std::string diagnostics = {})
        : std::runtime_error(what), kind_(kind), diagnostics_(std::move(diagnostics))
    {
    }

    Kind kind() const { return kind_; }
    const std::string& diagnostics() const { return diagnostics_; }

private:
    Kind kind_;
    std::string diagnostics_;
};

struct ToolchainConfig {
    /// {flags} receives optimization_flags; {input}/{output} are paths.
    std::string compile_command = "cc {flags} -w -c {input} -o {output}";
    std::string disassemble_command = "objdump -d --no-show-raw-insn {input}";
    std::string optimization_flags = "-O3";
    int timeout_seconds = 60;

    static ToolchainConfig gcc() { return {}; }

    static ToolchainConfig clang()
    {
        ToolchainConfig tc;
        tc.compile_command = "clang {flags} -w -c {input} -o {output}";
        return tc;
    }

    /// LIVEGEN_CC / LIVEGEN_OBJDUMP replace the compiler and disassembler
    /// programs of the preset; LIVEGEN_CC_TEMPLATE / LIVEGEN_DISASM_TEMPLATE
    /// replace the whole templates.
    static ToolchainConfig from_env(ToolchainConfig tc)
    {
        if (const char* cc = std::getenv("LIVEGEN_CC"))
            tc.compile_command = std::string(cc) + " {flags} -w -c {input} -o {output}";
        if (const char* od = std::getenv("LIVEGEN_OBJDUMP"))
            tc.disassemble_command = std::string(od) + " -d --no-show-raw-insn {input}";
        if (const char* t = std::getenv("LIVEGEN_CC_TEMPLATE"))
            tc.compile_command = t;
        if (const char* t = std::getenv("LIVEGEN_DISASM_TEMPLATE"))
            tc.disassemble_command = t;
        return tc;
    }

    static ToolchainConfig from_env() { return from_env(gcc()); }

    void validate() const
    {
        if (compile_command.find("{input}") == std::string::npos ||
            compile_command.find("{output}") == std::string::npos)
            throw EvalError(EvalError::Kind::BadConfig, "compile template needs {input} and {output}");
        if (disassemble_command.find("{input}") == std::string::npos)
            throw EvalError(EvalError::Kind::BadConfig, "disassemble template needs {input}");
        if (timeout_seconds <= 0)
            throw EvalError(EvalError::Kind::BadConfig, "timeout must be positive");
    }
};

inline std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

inline std::string substitute(std::string tpl, const std::map<std::string, std::string>& holes)
{
    for (const auto& [key, value] : holes) {
        const std::string pat = "{" + key + "}";
        for (std::size_t pos = tpl.find(pat); pos != std::string::npos; pos = tpl.find(pat, pos + value.size()))
            tpl.replace(pos, pat.size(), value);
    }
    return tpl;
}

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
    double seconds = 0;
};

namespace detail {

inline std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline fs::path temp_file(const char* tag)
{
    std::string tpl = (fs::temp_directory_path() / (std::string("livegen-") + tag + "-XXXXXX")).string();
    int fd = ::mkstemp(tpl.data());
    if (fd < 0)
        throw EvalError(EvalError::Kind::Io, "cannot create temporary file");
    ::close(fd);
    return tpl;
}

} // namespace detail

/// Runs `cmd` through /bin/sh, capturing stdout and stderr. The whole
/// process group is killed once `timeout_seconds` elapse.
inline CommandResult run_command(const std::string& cmd, int timeout_seconds)
{
    CommandResult r;
    fs::path out_path = detail::temp_file("out"), err_path = detail::temp_file("err");
    auto start = std::chrono::steady_clock::now();

    pid_t pid = ::fork();
    if (pid < 0)
        throw EvalError(EvalError::Kind::Io, "fork failed");
    if (pid == 0) {
        ::setpgid(0, 0);
        int o = ::open(out_path.c_str(), O_WRONLY | O_TRUNC);
        int e = ::open(err_path.c_str(), O_WRONLY | O_TRUNC);
        if (o < 0 || e < 0)
            ::_exit(127);
        ::dup2(o, 1);
        ::dup2(e, 2);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);

    const auto deadline = start + std::chrono::seconds(timeout_seconds);
    int status = 0;
    for (;;) {
        pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid)
            break;
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            r.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!r.timed_out)
        r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.out = detail::slurp(out_path);
    r.err = detail::slurp(err_path);
    std::error_code ec;
    fs::remove(out_path, ec);
    fs::remove(err_path, ec);
    return r;
}

struct CompileResult {
    fs::path object;
    double seconds = 0;
};

/// Compiles `source` into `object` (defaults to the source path with a .o
/// extension). Throws EvalError with the captured diagnostics on failure.
inline CompileResult compile_source(const fs::path& source, const ToolchainConfig& tc, fs::path object = {})
{
    tc.validate();
    if (object.empty())
        object = fs::path(source).replace_extension(".o");
    std::string cmd = substitute(tc.compile_command, {{"flags", tc.optimization_flags},
                                                      {"input", shell_quote(source.string())},
                                                      {"output", shell_quote(object.string())}});
    CommandResult r = run_command(cmd, tc.timeout_seconds);
    if (r.timed_out)
        throw EvalError(EvalError::Kind::Timeout, "compilation of " + source.string() + " timed out", r.err);
    if (r.exit_code != 0)
        throw EvalError(EvalError::Kind::CompileFailure,
                        "compilation of " + source.string() + " failed with status " + std::to_string(r.exit_code),
                        r.err);
    return {object, r.seconds};
}

struct ObjectMeasure {
    std::size_t instruction_count = 0;
    std::set<std::string> opcodes;
};

/// Counts instruction lines in objdump-style disassembly ("addr:\t[bytes\t]insn").
/// Symbol labels, section headers and raw-byte continuation lines are not
/// instructions; the opcode is the first token of the instruction text.
inline ObjectMeasure parse_disassembly(std::string_view text)
{
    ObjectMeasure m;
    auto is_hex_bytes = [](std::string_view s) {
        bool any = false;
        for (char c : s) {
            if (std::isxdigit(static_cast<unsigned char>(c)))
                any = true;
            else if (c != ' ')
                return false;
        }
        return any;
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;

        std::size_t i = 0;
        while (i < line.size() && line[i] == ' ')
            ++i;
        std::size_t addr_start = i;
        while (i < line.size() && std::isxdigit(static_cast<unsigned char>(line[i])))
            ++i;
        if (i == addr_start || i + 1 >= line.size() || line[i] != ':' || line[i + 1] != '\t')
            continue;
        std::string_view rest = line.substr(i + 2);
        std::string_view insn = rest;
        if (std::size_t tab = rest.find('\t'); tab != std::string_view::npos)
            insn = rest.substr(tab + 1);
        else if (is_hex_bytes(rest))
            continue;
        std::size_t b = insn.find_first_not_of(" \t");
        if (b == std::string_view::npos)
            continue;
        std::size_t e = insn.find_first_of(" \t", b);
        m.opcodes.emplace(insn.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
        ++m.instruction_count;
    }
    return m;
}

inline ObjectMeasure measure_object(const fs::path& object, const ToolchainConfig& tc)
{
    tc.validate();
    if (!fs::exists(object))
        throw EvalError(EvalError::Kind::DisassembleFailure, "object file " + object.string() + " does not exist");
    std::string cmd = substitute(tc.disassemble_command, {{"input", shell_quote(object.string())}});
    CommandResult r = run_command(cmd, tc.timeout_seconds);
    if (r.timed_out || r.exit_code != 0)
        throw EvalError(EvalError::Kind::DisassembleFailure, "disassembly of " + object.string() + " failed", r.err);
    return parse_disassembly(r.out);
}

/// Non-blank physical lines that are not entirely comment.
inline std::size_t count_code_lines(std::string_view src)
{
    std::size_t count = 0;
    bool in_block = false;
    std::size_t pos = 0;
    while (pos < src.size()) {
        std::size_t nl = src.find('\n', pos);
        std::string_view line = src.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? src.size() : nl + 1;
        bool code = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (in_block) {
                if (line.compare(i, 2, "*/") == 0) {
                    in_block = false;
                    ++i;
                }
            } else if (line.compare(i, 2, "/*") == 0) {
                in_block = true;
                ++i;
            } else if (line.compare(i, 2, "//") == 0) {
                break;
            } else if (!std::isspace(static_cast<unsigned char>(line[i]))) {
                code = true;
            }
        }
        if (code)
            ++count;
    }
    return count;
}

struct FileStats {
    std::string file;
    std::size_t lines_of_code = 0;
    std::size_t instruction_count = 0;
    std::set<std::string> unique_opcodes;
    double generation_seconds = 0;
    double compile_seconds = 0;
};

struct MetricSummary {
    double min = 0;
    double median = 0;
    double max = 0;
    double total = 0;
};

struct AggregateReport {
    std::size_t files = 0;
    MetricSummary lines_of_code;
    MetricSummary instructions;
    MetricSummary unique_opcodes;
    MetricSummary instructions_per_line;
    std::set<std::string> opcode_union;
    double generation_seconds = 0;
    double compile_seconds = 0;
    /// Lines of C per second of generation time (0 when unknown).
    double lines_per_second = 0;
};

/// Exact summary; an even-sized sample's median is the mean of the two
/// middle values.
inline MetricSummary summarize(std::vector<double> values)
{
    if (values.empty())
        throw EvalError(EvalError::Kind::EmptyInput, "no values to summarize");
    std::sort(values.begin(), values.end());
    MetricSummary s;
    s.min = values.front();
    s.max = values.back();
    std::size_t n = values.size();
    s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    for (double v : values)
        s.total += v;
    return s;
}

inline AggregateReport aggregate_stats(std::span<const FileStats> stats)
{
    if (stats.empty())
        throw EvalError(EvalError::Kind::EmptyInput, "aggregate_stats needs at least one file");
    AggregateReport r;
    r.files = stats.size();
    std::vector<double> loc, insns, ops, density;
    for (const FileStats& f : stats) {
        loc.push_back(static_cast<double>(f.lines_of_code));
        insns.push_back(static_cast<double>(f.instruction_count));
        ops.push_back(static_cast<double>(f.unique_opcodes.size()));
        density.push_back(f.lines_of_code ? static_cast<double>(f.instruction_count) / f.lines_of_code : 0.0);
        r.opcode_union.insert(f.unique_opcodes.begin(), f.unique_opcodes.end());
        r.generation_seconds += f.generation_seconds;
        r.compile_seconds += f.compile_seconds;
    }
    r.lines_of_code = summarize(loc);
    r.instructions = summarize(insns);
    r.unique_opcodes = summarize(ops);
    r.instructions_per_line = summarize(density);
    if (r.generation_seconds > 0)
        r.lines_per_second = r.lines_of_code.total / r.generation_seconds;
    return r;
}

inline nlohmann::json to_json(const MetricSummary& m)
{
    return {{"min", m.min}, {"median", m.median}, {"max", m.max}, {"total", m.total}};
}

inline nlohmann::json to_json(const AggregateReport& r)
{
    return {{"files", r.files},
            {"lines_of_code", to_json(r.lines_of_code)},
            {"instructions", to_json(r.instructions)},
            {"unique_opcodes", to_json(r.unique_opcodes)},
            {"instructions_per_line", to_json(r.instructions_per_line)},
            {"opcode_union_size", r.opcode_union.size()},
            {"opcode_union", r.opcode_union},
            {"generation_seconds", r.generation_seconds},
            {"compile_seconds", r.compile_seconds},
            {"lines_per_second", r.lines_per_second}};
}

/// Table layout: one row per metric with min, median, max, total. As in
/// the usual presentation, the total of the unique-opcode row is the size
/// of the corpus-wide opcode union rather than a sum.
inline std::string to_csv(const AggregateReport& r)
{
    std::ostringstream os;
    auto row = [&](const char* name, const MetricSummary& m, double total) {
        os << name << ',' << m.min << ',' << m.median << ',' << m.max << ',' << total << '\n';
    };
    os << "metric,min,median,max,total\n";
    row("lines of code", r.lines_of_code, r.lines_of_code.total);
    row("instructions", r.instructions, r.instructions.total);
    row("unique opcodes", r.unique_opcodes, static_cast<double>(r.opcode_union.size()));
    return os.str();
}

struct EvalOptions {
    ToolchainConfig toolchain;
    int jobs = 1;
    /// Where object files go; a fresh temporary directory when empty.
    fs::path object_dir;
};

struct EvalOutcome {
    std::vector<FileStats> stats;
    std::vector<std::pair<std::string, std::string>> failures; // file, diagnostics
};

/// Compiles and measures every file, `jobs` at a time. Generation times
/// come from `generation_seconds` (keyed by file name) when provided.
inline EvalOutcome evaluate_files(const std::vector<fs::path>& files, const EvalOptions& opts,
                                  const std::map<std::string, double>& generation_seconds = {})
{
    opts.toolchain.validate();
    fs::path objdir = opts.object_dir;
    bool own_dir = objdir.empty();
    if (own_dir) {
        objdir = detail::temp_file("objs");
        fs::remove(objdir);
    }
    fs::create_directories(objdir);

    std::vector<std::optional<FileStats>> results(files.size());
    std::vector<std::string> errors(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < files.size(); k = next++) {
            const fs::path& src = files[k];
            try {
                FileStats st;
                st.file = src.filename().string();
                st.lines_of_code = count_code_lines(detail::slurp(src));
                fs::path obj = objdir / (src.stem().string() + "." + std::to_string(k) + ".o");
                CompileResult c = compile_source(src, opts.toolchain, obj);
                st.compile_seconds = c.seconds;
                ObjectMeasure m = measure_object(obj, opts.toolchain);
                st.instruction_count = m.instruction_count;
                st.unique_opcodes = std::move(m.opcodes);
                if (auto it = generation_seconds.find(st.file); it != generation_seconds.end())
                    st.generation_seconds = it->second;
                results[k] = std::move(st);
            } catch (const EvalError& e) {
                errors[k] = std::string(e.what()) + (e.diagnostics().empty() ? "" : "\n" + e.diagnostics());
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::max(opts.jobs, 1); ++j)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    if (own_dir) {
        std::error_code ec;
        fs::remove_all(objdir, ec);
    }

    EvalOutcome out;
    for (std::size_t k = 0; k < files.size(); ++k) {
        if (results[k])
            out.stats.push_back(std::move(*results[k]));
        else
            out.failures.emplace_back(files[k].string(), errors[k]);
    }
    return out;
}

/// Heuristic x86 SIMD test on an AT&T mnemonic: SSE/AVX packed forms and
/// the vector move/shuffle families.
inline bool is_simd_mnemonic(std::string_view m)
{
    static const std::set<std::string_view> scalar_p = {"push", "pushq", "pushw", "pop", "popq", "popw", "pause",
                                                        "popcnt", "pdep", "pext", "prefetcht0", "prefetcht1",
                                                        "prefetcht2", "prefetchnta", "prefetchw", "pushf", "popf",
                                                        "pushfq", "popfq"};
    if (m.empty())
        return false;
    if (m[0] == 'p')
        return !scalar_p.contains(m);
    if (m[0] == 'v')
        return m != "verr" && m != "verw";
    static const std::set<std::string_view> sse = {"movdqa", "movdqu", "movaps", "movups", "movapd", "movupd",
                                                   "shufps", "shufpd", "unpcklps", "unpckhps", "unpcklpd",
                                                   "unpckhpd", "movhlps", "movlhps", "movmskps", "movmskpd"};
    if (sse.contains(m))
        return true;
    auto ends = [&](std::string_view suf) { return m.size() > suf.size() && m.ends_with(suf); };
    return ends("ps") || ends("pd");
}

} // namespace livegen::eval
