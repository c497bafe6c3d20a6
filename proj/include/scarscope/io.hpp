#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "scarscope/scramble.hpp"
#include "scarscope/version.hpp"

namespace scarscope {

using json = nlohmann::json;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV schema: header `site,time,value_re,value_im,flag`, one row per
// (site, time) pair, sites outer. Doubles carry 17 significant digits so
// the file round-trips bit-exactly.
inline void write_field_csv(const ScramblingField& field, std::ostream& os) {
  os << "site,time,value_re,value_im,flag\n";
  for (Eigen::Index j = 0; j < field.site_count(); ++j)
    for (Eigen::Index it = 0; it < field.time_count(); ++it) {
      os << field.sites[j] << ',' << detail::fmt_double(field.times[it]) << ','
         << detail::fmt_double(field.values(j, it).real()) << ','
         << detail::fmt_double(field.values(j, it).imag()) << ','
         << static_cast<int>(field.flags(j, it)) << '\n';
    }
}

inline void write_field_csv(const ScramblingField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  write_field_csv(field, os);
  if (!os.good()) throw io_error("write failed: " + path);
}

inline ScramblingField read_field_csv(std::istream& is, FieldKind kind = FieldKind::otoc) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("site,time,", 0) != 0)
    throw io_error("field CSV: missing header row");
  ScramblingField field;
  field.kind = kind;
  std::map<int, std::size_t> site_row;
  std::vector<std::tuple<int, double, cplx, std::uint8_t>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    int site, flag;
    double t, re, im;
    std::getline(ss, tok, ',');
    site = std::stoi(tok);
    std::getline(ss, tok, ',');
    t = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    re = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    im = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    flag = std::stoi(tok);
    rows.emplace_back(site, t, cplx(re, im), static_cast<std::uint8_t>(flag));
    if (!site_row.count(site)) {
      site_row[site] = field.sites.size();
      field.sites.push_back(site);
    }
  }
  if (rows.empty()) throw io_error("field CSV: no data rows");
  // time grid from the first site block
  for (const auto& [site, t, v, f] : rows) {
    if (site != field.sites.front()) break;
    field.times.push_back(t);
  }
  const Eigen::Index nt = static_cast<Eigen::Index>(field.times.size());
  const Eigen::Index nj = static_cast<Eigen::Index>(field.sites.size());
  if (static_cast<Eigen::Index>(rows.size()) != nt * nj)
    throw io_error("field CSV: ragged (site, time) grid");
  field.values.setZero(nj, nt);
  field.flags.setZero(nj, nt);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& [site, t, v, f] = rows[k];
    const Eigen::Index j = static_cast<Eigen::Index>(site_row.at(site));
    const Eigen::Index it = static_cast<Eigen::Index>(k % nt);
    field.values(j, it) = v;
    field.flags(j, it) = f;
  }
  return field;
}

inline ScramblingField read_field_csv(const std::string& path, FieldKind kind = FieldKind::otoc) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open for reading: " + path);
  return read_field_csv(is, kind);
}

inline json field_to_json(const ScramblingField& field) {
  json out;
  out["kind"] = field.kind == FieldKind::otoc ? "otoc" : "holevo";
  out["sites"] = field.sites;
  out["times"] = field.times;
  json vre = json::array(), vim = json::array(), flg = json::array();
  for (Eigen::Index j = 0; j < field.site_count(); ++j) {
    json rre = json::array(), rim = json::array(), rfl = json::array();
    for (Eigen::Index it = 0; it < field.time_count(); ++it) {
      rre.push_back(field.values(j, it).real());
      rim.push_back(field.values(j, it).imag());
      rfl.push_back(static_cast<int>(field.flags(j, it)));
    }
    vre.push_back(rre);
    vim.push_back(rim);
    flg.push_back(rfl);
  }
  out["value_re"] = vre;
  out["value_im"] = vim;
  out["flags"] = flg;
  out["meta"] = field.meta;
  return out;
}

inline ScramblingField field_from_json(const json& in) {
  ScramblingField field;
  field.kind = in.at("kind") == "holevo" ? FieldKind::holevo : FieldKind::otoc;
  field.sites = in.at("sites").get<std::vector<int>>();
  field.times = in.at("times").get<std::vector<double>>();
  const Eigen::Index nj = static_cast<Eigen::Index>(field.sites.size());
  const Eigen::Index nt = static_cast<Eigen::Index>(field.times.size());
  field.values.setZero(nj, nt);
  field.flags.setZero(nj, nt);
  for (Eigen::Index j = 0; j < nj; ++j)
    for (Eigen::Index it = 0; it < nt; ++it) {
      field.values(j, it) = cplx(in.at("value_re")[j][it].get<double>(),
                                 in.at("value_im")[j][it].get<double>());
      field.flags(j, it) = static_cast<std::uint8_t>(in.at("flags")[j][it].get<int>());
    }
  if (in.contains("meta"))
    field.meta = in.at("meta").get<std::map<std::string, std::string>>();
  return field;
}

// Sidecar metadata: everything needed to reproduce the run.
inline void write_sidecar(const std::string& data_path, const json& resolved_config,
                          const ScramblingField* field, double wall_seconds,
                          const json& diagnostics = json::object()) {
  json side;
  side["library"] = "scarscope";
  side["version"] = SCARSCOPE_VERSION;
  side["config"] = resolved_config;
  side["wall_time_s"] = wall_seconds;
  side["diagnostics"] = diagnostics;
  if (field) {
    side["field_meta"] = field->meta;
    side["kind"] = field->kind == FieldKind::otoc ? "otoc" : "holevo";
  }
  std::ofstream os(data_path + ".meta.json");
  if (!os) throw io_error("cannot open for writing: " + data_path + ".meta.json");
  os << side.dump(2) << '\n';
}

}  // namespace scarscope
