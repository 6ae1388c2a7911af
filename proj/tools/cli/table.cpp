#include "table.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace longrun::cli {

namespace {

// Non-finite numbers never reach the writers.
Cell sanitize(Cell c) {
    if (const double* v = std::get_if<double>(&c); v && !std::isfinite(*v)) {
        return Missing{"non-finite value"};
    }
    return c;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string reasons(const Table& t, const std::vector<Cell>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (const auto* m = std::get_if<Missing>(&row[i])) {
            if (!out.empty()) out += "; ";
            out += t.columns[i] + ": " + m->reason;
        }
    }
    return out;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    for (auto& c : row) c = sanitize(std::move(c));
    rows.push_back(std::move(row));
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv(const Table& t, std::ostream& os) {
    for (const auto& c : t.columns) os << c << ',';
    os << "reason\n";
    for (const auto& row : t.rows) {
        for (const auto& cell : row) {
            if (const auto* d = std::get_if<double>(&cell)) os << format_number(*d);
            else if (const auto* s = std::get_if<std::string>(&cell)) os << csv_escape(*s);
            else if (const auto* b = std::get_if<bool>(&cell)) os << (*b ? "true" : "false");
            os << ',';
        }
        os << csv_escape(reasons(t, row)) << '\n';
    }
}

nlohmann::ordered_json to_json(const Table& t) {
    nlohmann::ordered_json doc;
    doc["command"] = t.command;
    doc["columns"] = t.columns;
    auto& rows = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r;
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, Missing>) r[t.columns[i]] = nullptr;
                    else r[t.columns[i]] = v;
                },
                row[i]);
        }
        r["reason"] = reasons(t, row);
        rows.push_back(std::move(r));
    }
    return doc;
}

void write_json(const Table& t, std::ostream& os) { os << to_json(t).dump(2) << '\n'; }

}  // namespace longrun::cli
