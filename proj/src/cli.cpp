// SPDX-License-Identifier: MIT
#include "prashna/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "prashna/analyzer.hpp"
#include "prashna/engine.hpp"
#include "prashna/errors.hpp"
#include "prashna/facts.hpp"
#include "prashna/loader.hpp"
#include "prashna/netspec.hpp"

namespace fs = std::filesystem;

namespace prashna {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io_error, "cannot write " + path);
    out << content;
    if (!out)
        fail(errc::io_error, "short write to " + path);
}

std::vector<std::string> split_queries(const std::string& text, std::string* leftover) {
    std::vector<std::string> out;
    std::string current;
    bool in_string = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            current += c;
            if (c == '\\' && i + 1 < text.size())
                current += text[++i];
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            current += c;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n')
                ++i;
            current += '\n';
            continue;
        }
        current += c;
        if (c == '.') {
            char next = i + 1 < text.size() ? text[i + 1] : ' ';
            bool ends = next == ' ' || next == '\t' || next == '\r' || next == '\n' || next == '#';
            if (ends) {
                size_t b = current.find_first_not_of(" \t\r\n");
                out.push_back(current.substr(b));
                current.clear();
            }
        }
    }
    if (in_string) {
        if (!leftover)
            fail(errc::syntax_error, "unterminated string in query text");
        *leftover = current;
        return out;
    }
    bool pending = current.find_first_not_of(" \t\r\n") != std::string::npos;
    if (leftover) {
        *leftover = pending ? current : "";
    } else if (pending) {
        fail(errc::syntax_error, "query text after the last '.' terminator");
    }
    return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& base_dir) {
    std::vector<ManifestEntry> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() || base_dir.empty() ? fp.string() : (fs::path(base_dir) / fp).string();
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string token;
        ManifestEntry entry;
        bool have_path = false;
        while (fields >> token) {
            if (!have_path) {
                entry.path = resolve(token);
                have_path = true;
                continue;
            }
            auto eq = token.find('=');
            if (eq == std::string::npos)
                fail(errc::parse_error,
                     "manifest line " + std::to_string(lineno) + ": expected key=value, got '" + token + "'");
            std::string key = token.substr(0, eq);
            std::string value = token.substr(eq + 1);
            if (value.empty())
                fail(errc::parse_error, "manifest line " + std::to_string(lineno) + ": empty " + key);
            if (key == "name")
                entry.name = value;
            else if (key == "hook")
                entry.hook = value;
            else if (key == "section")
                entry.section = value;
            else if (key == "maps")
                entry.maps = resolve(value);
            else
                fail(errc::parse_error,
                     "manifest line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (have_path)
            out.push_back(std::move(entry));
    }
    return out;
}

std::vector<SuiteEntry> parse_suite(const std::string& text) {
    std::vector<SuiteEntry> out;
    std::set<std::string> names;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string keyword;
        if (!(fields >> keyword))
            continue;
        const std::string where = "suite line " + std::to_string(lineno) + ": ";
        if (keyword != "expect")
            fail(errc::parse_error, where + "lines start with 'expect'");
        std::string polarity;
        if (!(fields >> polarity) || (polarity != "pass" && polarity != "fail"))
            fail(errc::parse_error, where + "expected 'pass' or 'fail'");
        std::string rest;
        std::getline(fields, rest);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            fail(errc::parse_error, where + "expected '<name>: <query>'");
        SuiteEntry entry;
        entry.expect_pass = polarity == "pass";
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t");
            if (b == std::string::npos)
                return std::string();
            size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        entry.name = trim(rest.substr(0, colon));
        entry.query = trim(rest.substr(colon + 1));
        if (entry.name.empty() || entry.query.empty())
            fail(errc::parse_error, where + "expected '<name>: <query>'");
        if (!names.insert(entry.name).second)
            fail(errc::parse_error, where + "duplicate entry name '" + entry.name + "'");
        out.push_back(std::move(entry));
    }
    return out;
}

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')
                   ? c
                   : '_';
    return out;
}

struct AnalyzeArgs {
    std::string spec_path;
    std::string out_path;
    std::string chain;
    std::string dump_cfgnc;
    std::string dump_dot;
    std::string hook;
    std::string name;
    std::string section;
    std::string maps;
    uint64_t budget = 0;
    std::vector<std::string> objects;
};

int cmd_analyze(const AnalyzeArgs& args) {
    NetSpec spec = load_netspec(args.spec_path);

    std::vector<ManifestEntry> inputs;
    bool chain_mode = !args.chain.empty();
    if (chain_mode) {
        if (!args.objects.empty())
            fail(errc::usage_error, "give either --chain or object paths, not both");
        inputs = parse_manifest(read_file(args.chain), fs::path(args.chain).parent_path().string());
        if (inputs.empty())
            fail(errc::usage_error, "manifest lists no inputs");
    } else {
        if (args.objects.empty())
            fail(errc::usage_error, "no input objects given");
        if (args.objects.size() > 1 && !args.name.empty())
            fail(errc::usage_error, "--name applies to a single input only");
        for (const std::string& path : args.objects) {
            ManifestEntry entry;
            entry.path = path;
            if (!args.name.empty())
                entry.name = args.name;
            if (!args.hook.empty())
                entry.hook = args.hook;
            if (!args.section.empty())
                entry.section = args.section;
            if (!args.maps.empty())
                entry.maps = args.maps;
            inputs.push_back(std::move(entry));
        }
    }

    uint64_t budget = args.budget ? args.budget : default_path_budget();
    std::vector<Fact> facts;
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const ManifestEntry& input : inputs) {
        NfObject nf = sniff_elf(input.path)
                          ? load_object(input.path, input.section, input.hook)
                          : load_bundle(input.path, input.maps, BundleOptions{input.name, input.hook});
        if (!seen.insert(nf.nf_id).second)
            fail(errc::duplicate_nf_id, nf.nf_id);
        CfgNc result = analyze_nf(nf, spec, budget);
        std::vector<Fact> nf_facts = emit_facts(result, nf.nf_id);
        std::cout << nf.nf_id << ": " << result.cfg.blocks.size() << " blocks, "
                  << result.paths_walked << " paths, " << nf_facts.size() << " facts\n";
        ids.push_back(nf.nf_id);
        facts.insert(facts.end(), nf_facts.begin(), nf_facts.end());
        if (!args.dump_cfgnc.empty()) {
            fs::create_directories(args.dump_cfgnc);
            write_file((fs::path(args.dump_cfgnc) / (sanitize_id(nf.nf_id) + ".json")).string(),
                       cfgnc_to_json(result));
        }
        if (!args.dump_dot.empty()) {
            fs::create_directories(args.dump_dot);
            write_file((fs::path(args.dump_dot) / (sanitize_id(nf.nf_id) + ".dot")).string(),
                       to_dot(result.cfg));
        }
    }
    if (chain_mode) {
        std::vector<Fact> chain_facts = emit_chain_facts(ids);
        facts.insert(facts.end(), chain_facts.begin(), chain_facts.end());
    }

    KnowledgeBase kb;
    kb.add_all(std::move(facts));
    write_file(args.out_path, serialize_kb(kb));
    std::cout << "wrote " << kb.size() << " facts to " << args.out_path << "\n";
    return 0;
}

void print_result(const SolveResult& result) {
    if (!result.retrieval) {
        std::cout << (result.truth ? "true" : "false") << "\n";
        return;
    }
    if (result.rows.empty()) {
        std::cout << "false\n";
        return;
    }
    for (const std::vector<std::string>& row : result.rows) {
        std::string line;
        for (size_t i = 0; i < row.size(); ++i) {
            if (i)
                line += ", ";
            line += result.variables[i] + " = " + row[i];
        }
        std::cout << line << "\n";
    }
}

void repl_loop(const Engine& engine) {
    std::string buffer;
    std::string line;
    std::cout << "?- " << std::flush;
    while (std::getline(std::cin, line)) {
        buffer += line;
        buffer += '\n';
        std::string leftover;
        std::vector<std::string> queries = split_queries(buffer, &leftover);
        buffer = leftover;
        for (const std::string& q : queries) {
            try {
                print_result(engine.solve(q));
            } catch (const Error& e) {
                std::cout << "error: " << e.what() << "\n";
            }
        }
        std::cout << "?- " << std::flush;
    }
    std::cout << "\n";
}

int cmd_query(const std::string& kb_path, const std::string& expr, const std::string& file,
              bool repl) {
    if (expr.empty() && file.empty() && !repl)
        fail(errc::usage_error, "give a query with -e, a query file with -f, or --repl");
    Engine engine(parse_kb(read_file(kb_path)));
    if (!expr.empty())
        print_result(engine.solve(expr));
    if (!file.empty())
        for (const std::string& q : split_queries(read_file(file)))
            print_result(engine.solve(q));
    if (repl)
        repl_loop(engine);
    return 0;
}

int cmd_assert(const std::string& kb_path, const std::string& suite_path) {
    Engine engine(parse_kb(read_file(kb_path)));
    std::vector<SuiteEntry> suite = parse_suite(read_file(suite_path));
    if (suite.empty())
        fail(errc::usage_error, "suite has no entries");
    int mismatches = 0;
    for (const SuiteEntry& entry : suite) {
        SolveResult result = engine.solve(entry.query);
        bool got_pass = result.truth;
        if (got_pass == entry.expect_pass) {
            std::cout << "ok " << entry.name << " (" << (got_pass ? "pass" : "fail") << ")\n";
        } else {
            std::cout << "mismatch " << entry.name << ": expected "
                      << (entry.expect_pass ? "pass" : "fail") << ", got "
                      << (got_pass ? "pass" : "fail") << "\n";
            ++mismatches;
        }
    }
    std::cout << (suite.size() - static_cast<size_t>(mismatches)) << "/" << suite.size()
              << " matched\n";
    return mismatches ? 1 : 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    try {
        CLI::App app{"Static analyzer and query engine for eBPF network functions"};
        app.require_subcommand(1);

        AnalyzeArgs analyze_args;
        CLI::App* analyze = app.add_subcommand("analyze", "Analyze bytecode into a knowledge base");
        analyze->add_option("-s,--spec", analyze_args.spec_path, "protocol/hook registry file")
            ->required();
        analyze->add_option("-o,--out", analyze_args.out_path, "knowledge base output path")
            ->required();
        analyze->add_option("--chain", analyze_args.chain, "chain manifest (ordered NF list)");
        analyze->add_option("--dump-cfgnc", analyze_args.dump_cfgnc, "directory for per-NF CFG-NC JSON");
        analyze->add_option("--dump-dot", analyze_args.dump_dot, "directory for per-NF DOT graphs");
        analyze->add_option("--budget", analyze_args.budget, "path enumeration budget");
        analyze->add_option("--hook", analyze_args.hook, "hook name override (xdp, tc)");
        analyze->add_option("--name", analyze_args.name, "NF id override (single input)");
        analyze->add_option("--section", analyze_args.section, "ELF program section name");
        analyze->add_option("--maps", analyze_args.maps, "sidecar file with map names");
        analyze->add_option("objects", analyze_args.objects, "object or assembly files");

        std::string kb_path, expr, query_file;
        bool repl = false;
        CLI::App* query = app.add_subcommand("query", "Run queries against a knowledge base");
        query->add_option("-k,--kb", kb_path, "knowledge base file")->required();
        query->add_option("-e,--eval", expr, "one query to evaluate");
        query->add_option("-f,--file", query_file, "file of '.'-terminated queries");
        query->add_flag("--repl", repl, "interactive prompt");

        std::string assert_kb, suite_path;
        CLI::App* assert_cmd = app.add_subcommand("assert", "Evaluate an assertion suite");
        assert_cmd->add_option("-k,--kb", assert_kb, "knowledge base file")->required();
        assert_cmd->add_option("-f,--file", suite_path, "suite file")->required();

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0)
                return app.exit(e);
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }

        if (analyze->parsed())
            return cmd_analyze(analyze_args);
        if (query->parsed())
            return cmd_query(kb_path, expr, query_file, repl);
        if (assert_cmd->parsed())
            return cmd_assert(assert_kb, suite_path);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace prashna
