#pragma once

// Line-oriented FIS document format (see docs/fis_format.md):
//
//   fis-version 1
//   output accel
//   [inputs]
//   input vlat -1.5 1.5
//     mf gaussmf 0.6 -1.5
//   [rules]
//   rule 0 2 -> 0.1 -0.4 1.2
//
// Blank lines and lines starting with '#' are ignored.

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcfollow/error.hpp"
#include "lcfollow/fis.hpp"
#include "lcfollow/text.hpp"

namespace lcfollow {

inline constexpr int fis_format_version = 1;

inline std::string serialize_fis(const FuzzyInferenceSystem& fis)
{
    using text::format_number;
    std::ostringstream out;
    out << "fis-version " << fis_format_version << "\n";
    out << "output " << fis.output_name() << "\n";
    out << "[inputs]\n";
    for (const auto& v : fis.inputs()) {
        out << "input " << v.name << ' ' << format_number(v.lo) << ' ' << format_number(v.hi) << "\n";
        for (const auto& mf : v.mfs) {
            out << "  mf " << mf_family_name(mf.family());
            for (double p : mf.params()) out << ' ' << format_number(p);
            out << "\n";
        }
    }
    out << "[rules]\n";
    for (const auto& rule : fis.rules()) {
        out << "rule";
        for (auto a : rule.antecedent) out << ' ' << a;
        out << " ->";
        for (double c : rule.consequent) out << ' ' << format_number(c);
        out << "\n";
    }
    return out.str();
}

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

inline bool is_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

class FisParser {
public:
    FisParser(std::string_view doc, std::string source) : doc_(doc), source_(std::move(source)) {}

    FuzzyInferenceSystem parse()
    {
        enum class Section { header, inputs, rules } section = Section::header;
        std::optional<int> version;
        std::optional<std::string> output;
        std::vector<FuzzyVariable> inputs;
        std::vector<Rule> rules;

        std::size_t pos = 0;
        while (pos <= doc_.size()) {
            auto end = doc_.find('\n', pos);
            if (end == std::string_view::npos) end = doc_.size();
            std::string_view line = doc_.substr(pos, end - pos);
            ++line_no_;
            pos = end + 1;
            const auto toks = tokenize(line);
            if (toks.empty() || toks[0].text.front() == '#') {
                if (end == doc_.size()) break;
                continue;
            }
            const auto& head = toks[0];
            if (head.text == "fis-version") {
                expect_count(toks, 2);
                if (version) fail(head, "duplicate fis-version");
                auto v = text::parse_integer(toks[1].text);
                if (!v) fail(toks[1], "version must be an integer");
                if (*v != fis_format_version) fail(toks[1], "unsupported fis-version " + std::string(toks[1].text));
                version = static_cast<int>(*v);
            } else if (!version) {
                fail(head, "document must start with 'fis-version'");
            } else if (head.text == "output") {
                expect_count(toks, 2);
                if (section != Section::header) fail(head, "'output' must precede the sections");
                if (!is_identifier(toks[1].text)) fail(toks[1], "invalid output name");
                output = std::string(toks[1].text);
            } else if (head.text == "[inputs]") {
                expect_count(toks, 1);
                if (section != Section::header) fail(head, "unexpected [inputs] section");
                section = Section::inputs;
            } else if (head.text == "[rules]") {
                expect_count(toks, 1);
                if (section != Section::inputs) fail(head, "[rules] must follow [inputs]");
                section = Section::rules;
            } else if (head.text == "input") {
                if (section != Section::inputs) fail(head, "'input' outside the [inputs] section");
                expect_count(toks, 4);
                if (!is_identifier(toks[1].text)) fail(toks[1], "invalid input name");
                for (const auto& v : inputs)
                    if (v.name == toks[1].text) fail(toks[1], "duplicate input name");
                const double lo = number(toks[2]);
                const double hi = number(toks[3]);
                if (!(lo < hi)) fail(toks[2], "universe requires lo < hi");
                inputs.push_back({std::string(toks[1].text), lo, hi, {}});
            } else if (head.text == "mf") {
                if (section != Section::inputs || inputs.empty()) fail(head, "'mf' must follow an 'input' line");
                if (toks.size() < 2) fail(head, "missing MF family");
                auto family = mf_family_from_name(toks[1].text);
                if (!family) fail(toks[1], "unknown MF family '" + std::string(toks[1].text) + "'");
                std::vector<double> params;
                for (std::size_t i = 2; i < toks.size(); ++i) params.push_back(number(toks[i]));
                if (auto problem = MembershipFunction::check(*family, params)) fail(toks[1], *problem);
                inputs.back().mfs.emplace_back(*family, std::move(params));
            } else if (head.text == "rule") {
                if (section != Section::rules) fail(head, "'rule' outside the [rules] section");
                rules.push_back(parse_rule(toks, inputs));
            } else {
                fail(head, "unexpected '" + std::string(head.text) + "'");
            }
            if (end == doc_.size()) break;
        }
        if (!version) fail_at(1, 1, "missing fis-version");
        if (!output) fail_at(line_no_, 1, "missing 'output' line");
        if (section != Section::rules) fail_at(line_no_, 1, "missing [rules] section");
        for (const auto& v : inputs)
            if (v.mfs.empty()) fail_at(line_no_, 1, "input '" + v.name + "' has no membership functions");
        if (rules.empty()) fail_at(line_no_, 1, "rule list is empty");
        try {
            return FuzzyInferenceSystem(std::move(inputs), std::move(*output), std::move(rules));
        } catch (const DataError& e) {
            fail_at(line_no_, 1, e.what());
        }
    }

private:
    Rule parse_rule(const std::vector<Token>& toks, const std::vector<FuzzyVariable>& inputs)
    {
        const std::size_t n = inputs.size();
        if (toks.size() != 1 + n + 1 + n + 1) {
            fail(toks[0], "rule needs " + std::to_string(n) + " antecedent indices, '->', and " + std::to_string(n + 1) +
                              " coefficients");
        }
        Rule rule;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& t = toks[1 + i];
            auto v = text::parse_integer(t.text);
            if (!v || *v < 0) fail(t, "antecedent index must be a non-negative integer");
            if (static_cast<std::size_t>(*v) >= inputs[i].mfs.size()) fail(t, "MF index out of range");
            rule.antecedent.push_back(static_cast<std::size_t>(*v));
        }
        if (toks[1 + n].text != "->") fail(toks[1 + n], "expected '->'");
        for (std::size_t i = 0; i <= n; ++i) rule.consequent.push_back(number(toks[2 + n + i]));
        for (std::size_t r = 0; r < rules_seen_.size(); ++r)
            if (rules_seen_[r] == rule.antecedent) fail(toks[0], "duplicate antecedent (same as rule " + std::to_string(r) + ")");
        rules_seen_.push_back(rule.antecedent);
        return rule;
    }

    double number(const Token& t)
    {
        auto v = text::parse_double(t.text);
        if (!v || !std::isfinite(*v)) fail(t, "expected a finite number, got '" + std::string(t.text) + "'");
        return *v;
    }

    void expect_count(const std::vector<Token>& toks, std::size_t n)
    {
        if (toks.size() != n) fail(toks[0], "'" + std::string(toks[0].text) + "' expects " + std::to_string(n - 1) + " argument(s)");
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) { fail_at(line_no_, t.column, msg); }

    [[noreturn]] void fail_at(std::size_t line, std::size_t column, const std::string& msg)
    {
        throw DataError(source_ + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
    }

    std::string_view doc_;
    std::string source_;
    std::size_t line_no_ = 0;
    std::vector<std::vector<std::size_t>> rules_seen_;
};

}  // namespace detail

/// Throws DataError with "source:line:column: message" on malformed input.
inline FuzzyInferenceSystem parse_fis(std::string_view document, std::string source = "<fis>")
{
    return detail::FisParser(document, std::move(source)).parse();
}

inline FuzzyInferenceSystem load_fis(const std::string& path) { return parse_fis(text::read_file(path), path); }

}  // namespace lcfollow
