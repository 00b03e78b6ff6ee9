#include "debias/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace debias {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error(path + ": malformed number '" + cell + "' at line " +
                                 std::to_string(line_no));
    return value;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

} // namespace

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_points_csv(const std::string& path, const std::vector<Vec2>& points) {
    auto out = open_for_write(path);
    out << "x,y\n";
    for (const Vec2& p : points)
        out << csv_number(p.x) << ',' << csv_number(p.y) << '\n';
}

std::vector<Vec2> read_points_csv(const std::string& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "x,y")
        throw std::invalid_argument(path + ": expected header 'x,y'");
    std::vector<Vec2> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty())
            continue;
        const auto cells = split_row(line);
        if (cells.size() != 2)
            throw std::runtime_error(path + ": expected 2 columns at line " +
                                     std::to_string(line_no));
        points.push_back({parse_cell(cells[0], path, line_no), parse_cell(cells[1], path, line_no)});
    }
    return points;
}

EvaluationSample read_points_errors_csv(const std::string& path) {
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument(path + ": empty file");
    line = strip_cr(line);
    if (line == "x,y")
        throw std::invalid_argument(path + ": missing 'error' column (header must be 'x,y,error')");
    if (line != "x,y,error")
        throw std::invalid_argument(path + ": expected header 'x,y,error'");

    EvaluationSample sample;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty())
            continue;
        const auto cells = split_row(line);
        if (cells.size() != 3)
            throw std::runtime_error(path + ": expected 3 columns at line " +
                                     std::to_string(line_no));
        sample.points.push_back(
            {parse_cell(cells[0], path, line_no), parse_cell(cells[1], path, line_no)});
        sample.errors.push_back(parse_cell(cells[2], path, line_no));
    }
    return sample;
}

void write_trials_csv(const std::string& path, const ExperimentReport& report) {
    auto out = open_for_write(path);
    out << "trial,true_risk,mce,ise,ise_e,coverage\n";
    for (std::size_t r = 0; r < report.trials.size(); ++r) {
        const auto& t = report.trials[r];
        auto cell = [](const std::optional<RiskEstimate>& est) {
            return est ? csv_number(est->value) : std::string("nan");
        };
        out << r << ',' << csv_number(t.true_risk) << ',' << cell(t.mce) << ',' << cell(t.ise)
            << ',' << cell(t.ise_e) << ',' << csv_number(t.coverage_fraction) << '\n';
    }
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
    auto out = open_for_write(path);
    out << "n,estimator,mean_bias,mape\n";
    for (const auto& row : report.rows)
        out << row.n << ',' << to_string(row.kind) << ',' << csv_number(row.mean_bias) << ','
            << csv_number(row.mape) << '\n';
}

} // namespace debias
