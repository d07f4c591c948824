// mcgp — minimalist categorial grammars with phases.
//
// Subcommands: lexicon-validate, check, parse, show.
// Exit codes: 0 success, 1 usage, 2 load/validation failure, 3 check
// failure, 4 parse found nothing.

#include "mcgp/search.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mcgp;

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_issues(const std::vector<LexiconIssue>& issues, std::ostream& os) {
    for (const LexiconIssue& is : issues) {
        os << "line " << is.line << ": ";
        if (!is.item.empty()) os << "item `" << is.item << "`: ";
        os << is.message << "\n";
    }
}

// Loads and fully validates, or reports and signals exit 2 via nullopt.
std::optional<Lexicon> load_or_complain(const std::string& path) {
    std::optional<std::string> text = slurp(path);
    if (!text) {
        std::cerr << "cannot read `" << path << "`\n";
        return std::nullopt;
    }
    LexiconLoadResult r = load_lexicon(*text);
    if (!r.ok()) {
        print_issues(r.issues, std::cerr);
        return std::nullopt;
    }
    return r.lexicon;
}

std::optional<ScriptNode> parse_script_or_complain(const std::string& path) {
    std::optional<std::string> text = slurp(path);
    if (!text) {
        std::cerr << "cannot read `" << path << "`\n";
        return std::nullopt;
    }
    try {
        return parse_script(*text);
    } catch (const ParseError& e) {
        std::cerr << "script error at byte " << e.position << ": " << e.what()
                  << "\n";
        return std::nullopt;
    }
}

PicMode pic_mode(const std::string& name) {
    return name == "lenient" ? PicMode::Lenient : PicMode::Strict;
}

int run_lexicon_validate(const std::string& path) {
    std::optional<std::string> text = slurp(path);
    if (!text) {
        std::cerr << "cannot read `" << path << "`\n";
        return 2;
    }
    LexiconLoadResult r = load_lexicon(*text);
    if (!r.ok()) {
        print_issues(r.issues, std::cout);
        std::cout << "invalid: " << r.issues.size()
                  << (r.issues.size() == 1 ? " issue" : " issues") << "\n";
        return 2;
    }
    auto list = [&](const char* tag, FeatureClass cls) {
        std::cout << tag << ":";
        for (const std::string& n : r.lexicon.features.names(cls))
            std::cout << " " << n;
        std::cout << "\n";
    };
    list("P1", FeatureClass::P1);
    list("P2", FeatureClass::P2);
    std::cout << "start: " << r.lexicon.start << "\n";
    for (const LexicalItem& item : r.lexicon.items)
        std::cout << "item " << item.name << ": ok : "
                  << render_formula(item.formula) << "\n";
    std::cout << "ok: " << r.lexicon.items.size()
              << (r.lexicon.items.size() == 1 ? " item" : " items") << "\n";
    return 0;
}

int run_check(const std::string& lexicon_path, const std::string& script_path,
              const std::string& pic, const std::string& format) {
    std::optional<Lexicon> lex = load_or_complain(lexicon_path);
    if (!lex) return 2;
    std::optional<ScriptNode> script = parse_script_or_complain(script_path);
    if (!script) return 2;
    CheckResult r = check_derivation(*lex, *script, pic_mode(pic));
    if (format == "tree")
        std::cout << render_sequent_tree(*script, r);
    else if (format == "script")
        std::cout << render_script(*script) << "\n";
    else
        std::cout << render_check_report(r);
    if (!r.ok()) {
        if (format != "report") {
            const CheckFailure& f = *r.failure;
            std::cout << "FAIL at " << f.path << ": ";
            if (f.kind) std::cout << rule_error_name(*f.kind) << ": ";
            std::cout << f.message << "\n";
        }
        return 3;
    }
    return 0;
}

int run_parse(const std::string& lexicon_path,
              const std::vector<std::string>& sentence,
              const std::string& start, const std::string& pic,
              const SearchBounds& bounds, const std::string& format) {
    std::optional<Lexicon> lex = load_or_complain(lexicon_path);
    if (!lex) return 2;
    if (!start.empty() && !lex->features.lookup(start)) {
        std::cerr << "start feature `" << start
                  << "` is not declared by the lexicon\n";
        return 2;
    }
    std::string joined;
    for (const std::string& part : sentence) {
        if (!joined.empty()) joined += " ";
        joined += part;
    }
    std::vector<std::string> words = split_words(joined);
    PicMode mode = pic_mode(pic);
    SearchOutcome out = parse_sentence(*lex, words, bounds, mode, start);
    std::string coverage =
        out.exhausted ? "search exhausted" : "bounds reached";
    if (out.results.empty()) {
        std::cout << "no derivation found; " << coverage << "\n";
        return 4;
    }
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        const ParseResult& r = out.results[i];
        std::cout << "[" << i + 1 << "] script: " << render_script(r.script)
                  << "\n";
        if (format == "tree" || format == "report") {
            CheckResult check = check_derivation(*lex, r.script, mode);
            std::cout << (format == "tree"
                              ? render_sequent_tree(r.script, check)
                              : render_check_report(check));
        } else {
            std::cout << "[" << i + 1 << "] final: " << r.sequent << "\n";
        }
    }
    std::cout << "found " << out.results.size()
              << (out.results.size() == 1 ? " derivation" : " derivations")
              << "; " << coverage << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimalist categorial grammars with phases"};
    app.require_subcommand(1);

    std::string lexicon_path;
    std::string script_path;
    std::string start;
    std::string pic = "strict";
    std::string format;
    std::vector<std::string> sentence;
    SearchBounds defaults;
    int max_hyps = defaults.max_hypotheses;
    int max_depth = defaults.max_depth;
    int max_items = defaults.max_items;
    int max_results = defaults.max_results;
    int max_cyclic = defaults.max_cyclic_per_phase;

    CLI::App* validate =
        app.add_subcommand("lexicon-validate", "validate a lexicon file");
    validate->add_option("--lexicon", lexicon_path, "lexicon file")
        ->required();

    auto add_check_flags = [&](CLI::App* cmd) {
        cmd->add_option("--lexicon", lexicon_path, "lexicon file")
            ->required();
        cmd->add_option("--script", script_path, "derivation script")
            ->required();
        cmd->add_option("--pic", pic, "phase impenetrability mode")
            ->check(CLI::IsMember({"strict", "lenient"}));
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"report", "tree", "script"}));
    };
    CLI::App* check =
        app.add_subcommand("check", "replay a derivation script");
    add_check_flags(check);
    CLI::App* show =
        app.add_subcommand("show", "render a derivation as a sequent tree");
    add_check_flags(show);

    CLI::App* parse = app.add_subcommand("parse", "search for derivations");
    parse->add_option("--lexicon", lexicon_path, "lexicon file")->required();
    parse->add_option("sentence", sentence, "words to parse")->required();
    parse->add_option("--start", start, "start category override");
    parse->add_option("--pic", pic, "phase impenetrability mode")
        ->check(CLI::IsMember({"strict", "lenient"}));
    parse->add_option("--max-hyps", max_hyps, "hypothesis budget");
    parse->add_option("--max-depth", max_depth, "derivation height cap");
    parse->add_option("--max-items", max_items, "chart size cap");
    parse->add_option("--max-results", max_results, "parses to report");
    parse->add_option("--max-cyclic", max_cyclic,
                      "cyclic hypotheses per phase");
    parse->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"report", "tree", "script"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (validate->parsed()) return run_lexicon_validate(lexicon_path);
    if (check->parsed())
        return run_check(lexicon_path, script_path, pic,
                         format.empty() ? "report" : format);
    if (show->parsed())
        return run_check(lexicon_path, script_path, pic,
                         format.empty() ? "tree" : format);
    if (parse->parsed()) {
        SearchBounds bounds;
        bounds.max_hypotheses = max_hyps;
        bounds.max_depth = max_depth;
        bounds.max_items = max_items;
        bounds.max_results = max_results;
        bounds.max_cyclic_per_phase = max_cyclic;
        return run_parse(lexicon_path, sentence, start, pic, bounds,
                         format.empty() ? "script" : format);
    }
    return 1;
}
