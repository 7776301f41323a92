#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mvp/errors.hpp"
#include "mvp/harness.hpp"

namespace mvp::harness {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool EstimateReport::finalize() {
  pass = std::isfinite(max_ratio) && max_ratio <= threshold;
  return pass;
}

std::string format_report(const EstimateReport& r) {
  std::ostringstream os;
  os << r.name << ".samples=" << r.samples << '\n';
  os << r.name << ".max_ratio=" << num(r.max_ratio) << '\n';
  os << r.name << ".threshold=" << num(r.threshold) << '\n';
  for (const auto& [k, v] : r.fitted) os << r.name << ".fitted." << k << '=' << num(v) << '\n';
  for (const auto& [k, v] : r.notes) os << r.name << ".note." << k << '=' << v << '\n';
  os << r.name << ".pass=" << (r.pass ? "true" : "false") << '\n';
  return os.str();
}

void write_reports(const std::string& path, const std::vector<EstimateReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& r : reports) out << format_report(r);
}

void write_summary_csv(const std::string& path, const std::vector<EstimateReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "name,samples,max_ratio,fitted_C,pass\n";
  for (const auto& r : reports) {
    auto it = r.fitted.find("C");
    out << r.name << ',' << r.samples << ',' << num(r.max_ratio) << ','
        << (it == r.fitted.end() ? std::string() : num(it->second)) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

bool all_pass(const std::vector<EstimateReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace mvp::harness
