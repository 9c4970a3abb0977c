#include "switchmc/errors.hpp"
#include "switchmc/model.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace switchmc {

namespace {

struct Token {
    std::string text;
    int line;   // 1-based
    int column; // 1-based
};

// Lines split into whitespace-separated tokens; '#' starts a comment.
std::vector<std::vector<Token>> tokenize_lines(std::string_view text) {
    std::vector<std::vector<Token>> lines;
    std::vector<Token> current;
    int line = 1;
    int column = 1;
    std::size_t i = 0;
    auto flush_line = [&] {
        lines.push_back(std::move(current));
        current.clear();
        ++line;
        column = 1;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            flush_line();
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            ++column;
        } else {
            Token tok{"", line, column};
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   text[i] != '#') {
                tok.text.push_back(text[i]);
                ++i;
                ++column;
            }
            current.push_back(std::move(tok));
        }
    }
    if (!current.empty())
        lines.push_back(std::move(current));
    return lines;
}

SpecCell parse_cell(const Token& tok) {
    if (tok.text == "x")
        return SpecCell::positive();
    const char* begin = tok.text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + tok.text.size())
        throw ParseError("expected a probability or 'x', got '" + tok.text + "'", tok.line,
                         tok.column);
    if (v < 0.0 || v > 1.0)
        throw ParseError("probability " + tok.text + " outside [0,1]", tok.line, tok.column);
    return SpecCell::exact(v);
}

// Re-validates row sums against the token positions so diagnostics can point
// at the offending row; ModeSpec construction re-checks the same invariants.
void check_row_sums(const std::vector<SpecCell>& row, const Token& first) {
    double exact_sum = 0.0;
    int wildcards = 0;
    for (const SpecCell& c : row) {
        if (c.wildcard)
            ++wildcards;
        else
            exact_sum += c.value;
    }
    if (wildcards == 0) {
        if (std::abs(exact_sum - 1.0) > 1e-9)
            throw ParseError("row sums to " + std::to_string(exact_sum) + ", expected 1",
                             first.line, first.column);
    } else if (exact_sum >= 1.0) {
        throw ParseError("row leaves no probability mass for its 'x' entries", first.line,
                         first.column);
    }
}

std::string format_probability(double v) {
    // shortest decimal form that parses back to the same double
    char buf[32];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

} // namespace

ModelSpec parse_model(std::string_view text) {
    const auto lines = tokenize_lines(text);
    std::size_t row = 0;
    auto next_significant = [&]() -> const std::vector<Token>* {
        while (row < lines.size() && lines[row].empty())
            ++row;
        return row < lines.size() ? &lines[row] : nullptr;
    };

    const auto* header = next_significant();
    if (!header)
        throw ParseError("empty model file", 1, 1);
    if ((*header)[0].text != "states:")
        throw ParseError("model file must start with a 'states:' line", (*header)[0].line,
                         (*header)[0].column);
    std::vector<std::string> labels;
    for (std::size_t i = 1; i < header->size(); ++i)
        labels.push_back((*header)[i].text);
    if (labels.empty())
        throw ParseError("'states:' line lists no states", (*header)[0].line,
                         (*header)[0].column);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] == labels[j])
                throw ParseError("duplicate state label '" + labels[i] + "'",
                                 (*header)[j + 1].line, (*header)[j + 1].column);
    const int n = static_cast<int>(labels.size());
    ++row;

    std::vector<ModeSpec> modes;
    while (const auto* line = next_significant()) {
        const Token& head = (*line)[0];
        if (head.text != "mode")
            throw ParseError("expected 'mode <name>:' header, got '" + head.text + "'",
                             head.line, head.column);
        if (line->size() != 2 || line->back().text.back() != ':')
            throw ParseError("mode header must be 'mode <name>:'", head.line, head.column);
        std::string name = (*line)[1].text;
        name.pop_back(); // trailing ':'
        ++row;

        std::vector<SpecCell> cells;
        cells.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
            const auto* matrix_row = next_significant();
            if (!matrix_row)
                throw ParseError("mode '" + name + "': expected " + std::to_string(n) +
                                     " matrix rows, got " + std::to_string(r),
                                 head.line, head.column);
            if (static_cast<int>(matrix_row->size()) != n)
                throw ParseError("mode '" + name + "': row has " +
                                     std::to_string(matrix_row->size()) + " entries, expected " +
                                     std::to_string(n),
                                 (*matrix_row)[0].line, (*matrix_row)[0].column);
            std::vector<SpecCell> parsed;
            parsed.reserve(static_cast<std::size_t>(n));
            for (const Token& tok : *matrix_row)
                parsed.push_back(parse_cell(tok));
            check_row_sums(parsed, (*matrix_row)[0]);
            cells.insert(cells.end(), parsed.begin(), parsed.end());
            ++row;
        }
        modes.emplace_back(n, std::move(cells), std::move(name));
    }
    if (modes.empty())
        throw ParseError("model defines no modes", 1, 1);
    return ModelSpec{StateSpace(std::move(labels)), std::move(modes)};
}

ModelSpec parse_model_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid model JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("states") || !doc.contains("modes"))
        throw Error("model JSON must be an object with 'states' and 'modes'");

    std::vector<std::string> labels;
    for (const auto& s : doc.at("states"))
        labels.push_back(s.get<std::string>());
    const int n = static_cast<int>(labels.size());

    std::vector<ModeSpec> modes;
    for (const auto& m : doc.at("modes")) {
        std::string name = m.value("name", "mode" + std::to_string(modes.size() + 1));
        const auto& rows = m.at("rows");
        if (static_cast<int>(rows.size()) != n)
            throw Error("mode '" + name + "': expected " + std::to_string(n) + " rows");
        std::vector<SpecCell> cells;
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != n)
                throw Error("mode '" + name + "': row width does not match state count");
            for (const auto& entry : r) {
                if (entry.is_string()) {
                    if (entry.get<std::string>() != "x")
                        throw Error("mode '" + name + "': unknown entry '" +
                                    entry.get<std::string>() + "'");
                    cells.push_back(SpecCell::positive());
                } else if (entry.is_number()) {
                    double v = entry.get<double>();
                    if (v < 0.0 || v > 1.0)
                        throw Error("mode '" + name + "': probability outside [0,1]");
                    cells.push_back(SpecCell::exact(v));
                } else {
                    throw Error("mode '" + name + "': entries must be numbers or \"x\"");
                }
            }
        }
        modes.emplace_back(n, std::move(cells), std::move(name));
    }
    if (modes.empty())
        throw Error("model defines no modes");
    return ModelSpec{StateSpace(std::move(labels)), std::move(modes)};
}

ModelSpec load_model(const std::string& path, std::string_view format) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open model file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (format == "text")
        return parse_model(buffer.str());
    if (format == "json")
        return parse_model_json(buffer.str());
    throw Error("unknown model format '" + std::string(format) + "' (expected text or json)");
}

std::string serialize_model(const ModelSpec& model) {
    std::ostringstream out;
    out << "states:";
    for (const auto& label : model.states.labels())
        out << ' ' << label;
    out << '\n';
    for (const auto& mode : model.modes) {
        out << "mode " << mode.name() << ":\n";
        for (int i = 0; i < mode.size(); ++i) {
            for (int j = 0; j < mode.size(); ++j) {
                if (j > 0)
                    out << ' ';
                const SpecCell& c = mode.at(i, j);
                out << (c.wildcard ? "x" : format_probability(c.value));
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string serialize_model_json(const ModelSpec& model) {
    nlohmann::json doc;
    doc["states"] = model.states.labels();
    doc["modes"] = nlohmann::json::array();
    for (const auto& mode : model.modes) {
        nlohmann::json m;
        m["name"] = mode.name();
        auto rows = nlohmann::json::array();
        for (int i = 0; i < mode.size(); ++i) {
            auto row = nlohmann::json::array();
            for (int j = 0; j < mode.size(); ++j) {
                const SpecCell& c = mode.at(i, j);
                if (c.wildcard)
                    row.push_back("x");
                else
                    row.push_back(c.value);
            }
            rows.push_back(std::move(row));
        }
        m["rows"] = std::move(rows);
        doc["modes"].push_back(std::move(m));
    }
    return doc.dump(2) + "\n";
}

} // namespace switchmc
