#pragma once

// Artifact plumbing shared by the CLI and the round-trip tests: channel
// argument parsing (exact and floating), rational serialization, report
// JSON with a stable layout, and the timestamp sidecar that keeps the
// main artifacts byte-identical across reruns.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"  // vendored single-header nlohmann/json

#include "expforge/channel.hpp"
#include "expforge/oracle.hpp"

namespace expforge::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibVersion = "1.0.0";

// "a/b", integers, and finite decimals ("0.1" -> 1/10) parse exactly.
inline oracle::Rational parse_rational(const std::string& s) {
  const auto bad = [&] {
    return std::invalid_argument("cannot parse rational: '" + s + "'");
  };
  if (s.empty()) throw bad();
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const oracle::BigInt num(s.substr(0, slash));
    const oracle::BigInt den(s.substr(slash + 1));
    if (den == 0) throw bad();
    return oracle::Rational(num, den);
  }
  std::string digits = s;
  const auto dot = s.find('.');
  oracle::BigInt den = 1;
  if (dot != std::string::npos) {
    digits = s.substr(0, dot) + s.substr(dot + 1);
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
  }
  if (digits.empty() || digits == "-" || digits == "+") throw bad();
  try {
    return oracle::Rational(oracle::BigInt(digits), den);
  } catch (const std::exception&) {
    throw bad();
  }
}

inline json rational_to_json(const oracle::Rational& r) {
  json j;
  j["num"] = numerator(r).str();
  j["den"] = denominator(r).str();
  j["approx"] = static_cast<double>(r);
  return j;
}

inline oracle::Rational rational_from_json(const json& j) {
  const oracle::BigInt num(j.at("num").get<std::string>());
  const oracle::BigInt den(j.at("den").get<std::string>());
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  return oracle::Rational(num, den);
}

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}
}  // namespace detail

// Channel descriptors: "bsc:<eps>", "qsc:<q>:<eps>", or a path to a JSON
// file {"q": ..., "matrix": [[...], ...]}.  The exact variant keeps the
// eps of the shorthand forms as a rational; matrix files are exact only
// if their entries are strings parseable by parse_rational.
inline channel::BasicDmc<oracle::Rational> parse_exact_channel(
    const std::string& arg) {
  const auto parts = detail::split(arg, ':');
  if (parts.size() == 2 && parts[0] == "bsc")
    return channel::make_bsc<oracle::Rational>(parse_rational(parts[1]));
  if (parts.size() == 3 && parts[0] == "qsc")
    return channel::make_qsc<oracle::Rational>(std::stoi(parts[1]),
                                               parse_rational(parts[2]));
  std::ifstream in(arg);
  if (!in) throw std::invalid_argument("cannot open channel file: " + arg);
  json j = json::parse(in);
  std::vector<std::vector<oracle::Rational>> rows;
  for (const auto& row : j.at("matrix")) {
    rows.emplace_back();
    for (const auto& cell : row)
      rows.back().push_back(cell.is_string()
                                ? parse_rational(cell.get<std::string>())
                                : oracle::Rational(cell.get<double>()));
  }
  return channel::make_dmc<oracle::Rational>(j.at("q").get<int>(), rows);
}

inline channel::Dmc parse_channel(const std::string& arg) {
  const auto exact = parse_exact_channel(arg);
  if (exact.symmetric)
    return channel::make_qsc<double>(exact.q,
                                     static_cast<double>(exact.sym_eps));
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(exact.q));
  for (int x = 0; x < exact.q; ++x)
    for (int y = 0; y < exact.y_size; ++y)
      rows[static_cast<std::size_t>(x)].push_back(
          static_cast<double>(exact.at(x, y)));
  return channel::make_dmc<double>(exact.q, rows);
}

inline json channel_to_json(const channel::Dmc& ch) {
  json j;
  j["q"] = ch.q;
  j["y_size"] = ch.y_size;
  if (ch.symmetric) {
    j["kind"] = "qsc";
    j["eps"] = ch.sym_eps;
  } else {
    j["kind"] = "matrix";
  }
  json rows = json::array();
  for (int x = 0; x < ch.q; ++x) {
    json row = json::array();
    for (int y = 0; y < ch.y_size; ++y) row.push_back(ch.at(x, y));
    rows.push_back(row);
  }
  j["matrix"] = rows;
  return j;
}

// Report skeleton shared by every CLI command.  The body is fully
// determined by the inputs (no clocks, no machine identity), which is
// what makes reruns byte-identical.
inline json make_report(const std::string& command, json params,
                        std::uint64_t seed) {
  json j;
  j["schema"] = kSchemaVersion;
  j["version"] = kLibVersion;
  j["command"] = command;
  j["params"] = std::move(params);
  j["seed"] = seed;
  j["results"] = json::object();
  return j;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Main artifact plus "<path>.meta.json" sidecar carrying the wall-clock
// timestamp, so the main file stays comparable across runs.
inline void write_report_files(const std::string& path, const json& body) {
  write_text_file(path, body.dump(2) + "\n");
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  json meta;
  meta["artifact"] = path;
  meta["written_at"] = buf;
  write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace expforge::io
