#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cascade/estimator.hpp"

namespace cascade {

void write_observations_csv(std::ostream& out, const ObservationSet& obs) {
  out << "step,target,y";
  for (std::size_t k = 1; k <= obs.dimension(); ++k) out << ",x_" << k;
  out << '\n' << std::setprecision(17);
  for (const auto& r : obs.records()) {
    out << r.step << ',' << r.target << ',' << (r.y ? 1 : 0);
    for (Eigen::Index k = 0; k < r.x.size(); ++k) out << ',' << r.x(k);
    out << '\n';
  }
}

ObservationSet read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("observation CSV is empty");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',';
  if (columns < 4 || line.rfind("step,target,y", 0) != 0)
    throw std::runtime_error("observation CSV header must be step,target,y,x_1..x_d");
  const std::size_t d = columns - 3;

  ObservationSet obs(d);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns)
      throw std::runtime_error("observation CSV line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(columns));
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(k)) = std::stod(cells[3 + k]);
    const int y = std::stoi(cells[2]);
    if (y != 0 && y != 1)
      throw std::runtime_error("observation CSV line " + std::to_string(line_no) +
                               ": y must be 0 or 1");
    obs.add(x, y == 1, static_cast<std::uint32_t>(std::stoul(cells[0])),
            static_cast<NodeId>(std::stoul(cells[1])));
  }
  return obs;
}

}  // namespace cascade
