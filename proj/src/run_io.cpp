#include "cascade/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cascade {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream row(line);
  while (std::getline(row, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

constexpr const char* kHeader =
    "round,phase,seed_set,spread,f_exp,regret,rho_star,lambda_min,radius_sq";

}  // namespace

void write_rounds_csv(std::ostream& out, const RunResult& run) {
  out << kHeader << '\n';
  for (const auto& l : run.logs) {
    out << l.round << ',' << to_string(l.phase) << ',' << format_seed_set(l.seeds) << ','
        << l.spread << ',' << real(l.f_exp) << ',' << real(l.regret) << ',' << real(l.rho_star)
        << ',' << real(l.lambda_min) << ',' << real(l.radius_sq) << '\n';
  }
}

std::vector<RoundLog> read_rounds_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("round CSV header mismatch");
  std::vector<RoundLog> logs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 9)
      throw std::runtime_error("round CSV line " + std::to_string(line_no) + ": expected 9 fields");
    RoundLog l;
    l.round = std::stoul(cells[0]);
    if (cells[1] == "explore") l.phase = Phase::explore;
    else if (cells[1] == "exploit") l.phase = Phase::exploit;
    else throw std::runtime_error("round CSV line " + std::to_string(line_no) + ": bad phase");
    if (!cells[2].empty())
      for (const auto& s : split(cells[2], ';')) l.seeds.push_back(static_cast<NodeId>(std::stoul(s)));
    l.spread = std::stoul(cells[3]);
    l.f_exp = std::stod(cells[4]);
    l.regret = std::stod(cells[5]);
    l.rho_star = std::stod(cells[6]);
    l.lambda_min = std::stod(cells[7]);
    l.radius_sq = std::stod(cells[8]);
    logs.push_back(std::move(l));
  }
  return logs;
}

std::vector<double> cumulative_regret(const std::vector<RoundLog>& logs) {
  std::vector<double> out;
  out.reserve(logs.size());
  double acc = 0.0;
  for (const auto& l : logs) out.push_back(acc += l.regret);
  return out;
}

void write_run(const std::filesystem::path& dir, const std::string& stem, const RunResult& run) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (stem + ".csv"));
  write_rounds_csv(csv, run);
  std::ofstream meta(dir / (stem + ".json"));
  meta << run.metadata.dump(2) << '\n';
  if (!csv || !meta) throw std::runtime_error("failed writing run output to " + dir.string());
}

}  // namespace cascade
