#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "est/applications.hpp"
#include "est/error.hpp"
#include "est/measure.hpp"
#include "est/slicing.hpp"

namespace est::io {

enum class Format { Csv, Json };

/// 17 significant digits: enough for an exact binary64 round trip.
inline std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline double parse_double(std::string_view cell, std::size_t line_no) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": '" + std::string(cell) + "' is not a number");
  }
  return value;
}

inline std::size_t parse_index(std::string_view cell, std::size_t line_no) {
  std::size_t value = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": '" + std::string(cell) + "' is not an index");
  }
  return value;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

// Weight/shape problems in a file are reported as parse errors.
template <class Fn>
DiscreteMeasure build_measure(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace detail

inline void write_measure_csv(std::ostream& out, const DiscreteMeasure& measure) {
  out << 'w';
  for (std::size_t k = 1; k <= measure.dim(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < measure.size(); ++i) {
    out << format_double(measure.weight(i));
    for (double c : measure.atom(i)) out << ',' << format_double(c);
    out << '\n';
  }
}

/// Header `w,x1,...,xd`, then one row per atom.
inline DiscreteMeasure read_measure_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "w") {
      throw Error(ErrorCode::ParseError, "expected header 'w,x1,...,xd'");
    }
    for (std::size_t k = 1; k < header.size(); ++k) {
      if (header[k] != "x" + std::to_string(k)) {
        throw Error(ErrorCode::ParseError, "unexpected header column '" + std::string(header[k]) + "'");
      }
    }
    dim = header.size() - 1;
    break;
  }
  if (dim == 0) throw Error(ErrorCode::ParseError, "missing header");
  std::vector<double> coords, weights;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != dim + 1) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(dim + 1) + " columns");
    }
    weights.push_back(detail::parse_double(cells[0], line_no));
    for (std::size_t k = 1; k <= dim; ++k) coords.push_back(detail::parse_double(cells[k], line_no));
  }
  if (weights.empty()) throw Error(ErrorCode::ParseError, "no atoms");
  return detail::build_measure(
      [&] { return DiscreteMeasure::from_flat(dim, std::move(coords), std::move(weights)); });
}

inline nlohmann::json measure_to_json(const DiscreteMeasure& measure) {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto a = measure.atom(i);
    atoms.push_back(std::vector<double>(a.begin(), a.end()));
  }
  const auto w = measure.weights();
  return {{"weights", std::vector<double>(w.begin(), w.end())}, {"atoms", std::move(atoms)}};
}

inline DiscreteMeasure measure_from_json(const nlohmann::json& doc) {
  try {
    const auto weights = doc.at("weights").get<std::vector<double>>();
    const auto atoms = doc.at("atoms").get<std::vector<std::vector<double>>>();
    return detail::build_measure([&] { return DiscreteMeasure::from_atoms(atoms, weights); });
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline void write_measure_json(std::ostream& out, const DiscreteMeasure& measure) {
  out << measure_to_json(measure).dump() << '\n';
}

inline DiscreteMeasure read_measure_json(std::istream& in) {
  try {
    return measure_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline Format format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? Format::Json : Format::Csv;
}

inline DiscreteMeasure load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return format_for(path) == Format::Json ? read_measure_json(in) : read_measure_csv(in);
}

inline void save_measure(const std::filesystem::path& path, const DiscreteMeasure& measure, Format format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  if (format == Format::Json) {
    write_measure_json(out, measure);
  } else {
    write_measure_csv(out, measure);
  }
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

/// Header `i,j,mass`, one row per entry.
inline void write_plan_csv(std::ostream& out, const TransportPlan& plan) {
  out << "i,j,mass\n";
  for (const auto& e : plan.entries) out << e.source << ',' << e.target << ',' << format_double(e.mass) << '\n';
}

inline TransportPlan read_plan_csv(std::istream& in, std::size_t source_size, std::size_t target_size) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  TransportPlan plan{source_size, target_size, {}};
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto cells = detail::split_csv(line);
    if (!header) {
      if (cells.size() != 3 || cells[0] != "i" || cells[1] != "j" || cells[2] != "mass") {
        throw Error(ErrorCode::ParseError, "expected header 'i,j,mass'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 3) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 columns");
    }
    PlanEntry e{detail::parse_index(cells[0], line_no), detail::parse_index(cells[1], line_no),
                detail::parse_double(cells[2], line_no)};
    if (e.source >= source_size || e.target >= target_size) {
      throw Error(ErrorCode::IndexOutOfRange, "line " + std::to_string(line_no) + ": index out of range");
    }
    plan.entries.push_back(e);
  }
  if (!header) throw Error(ErrorCode::ParseError, "missing header");
  return plan;
}

/// One row of d coordinates per direction.
inline void write_directions_csv(std::ostream& out, const Directions& directions) {
  for (std::size_t k = 1; k <= directions.dim(); ++k) out << (k > 1 ? "," : "") << "theta" << k;
  out << '\n';
  for (std::size_t l = 0; l < directions.size(); ++l) {
    const auto row = directions[l];
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
}

/// N rows × d columns, no header.
inline void write_embedding_csv(std::ostream& out, const EmbeddingMatrix& embedding) {
  for (std::size_t i = 0; i < embedding.rows; ++i) {
    const auto row = embedding.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
}

inline nlohmann::json method_to_json(const EmbedMethod& method, double p) {
  nlohmann::json j;
  j["p"] = p;
  if (const auto* m = std::get_if<EstMethod>(&method)) {
    j["method"] = "est";
    j["slices"] = m->slices;
    j["tau"] = m->tau;
    j["seed"] = m->seed;
  } else if (std::holds_alternative<ExactMethod>(method)) {
    j["method"] = "exact";
  } else {
    const auto& s = std::get<SinkhornMethod>(method);
    j["method"] = "sinkhorn";
    j["lambda"] = s.lambda;
    j["max_iters"] = s.max_iters;
    j["stop_tol"] = s.stop_tol;
  }
  return j;
}

}  // namespace est::io
