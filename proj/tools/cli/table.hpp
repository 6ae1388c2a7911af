#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace longrun::cli {

/// A cell that could not be computed. Written as an empty CSV cell (JSON
/// null) with the reason collected in the row's trailing `reason` column.
struct Missing {
    std::string reason;
};

using Cell = std::variant<double, std::string, bool, Missing>;

/// Column-ordered table; CSV and JSON carry the same content.
struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// Shortest round-trip decimal form; non-finite values are a logic error
/// upstream and are written as Missing instead.
std::string format_number(double v);

void write_csv(const Table& t, std::ostream& os);
nlohmann::ordered_json to_json(const Table& t);
void write_json(const Table& t, std::ostream& os);

}  // namespace longrun::cli
