#include "sbd/integrals.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "sbd/errors.hpp"

namespace sbd {

IntegralTable::IntegralTable(std::size_t norb)
    : norb_(norb), h_(norb * norb, 0.0), pair_(norb * norb, 0) {
  for (std::size_t p = 0; p < norb; ++p)
    for (std::size_t q = 0; q < norb; ++q)
      pair_[p * norb + q] = p >= q ? p * (p + 1) / 2 + q : q * (q + 1) / 2 + p;
  const std::size_t npair = norb * (norb + 1) / 2;
  eri_.assign(npair * (npair + 1) / 2, 0.0);
}

void IntegralTable::check(std::size_t p) const {
  if (p >= norb_)
    throw RangeError("orbital index " + std::to_string(p) + " out of range for norb=" +
                     std::to_string(norb_));
}

double IntegralTable::get_h(std::size_t p, std::size_t q) const {
  check(p);
  check(q);
  return h(p, q);
}

double IntegralTable::get_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
  check(p);
  check(q);
  check(r);
  check(s);
  return eri(p, q, r, s);
}

void IntegralTable::set_h(std::size_t p, std::size_t q, double v) {
  check(p);
  check(q);
  h_[p * norb_ + q] = v;
  h_[q * norb_ + p] = v;
}

void IntegralTable::set_eri(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) {
  check(p);
  check(q);
  check(r);
  check(s);
  eri_[composite(pair_[p * norb_ + q], pair_[r * norb_ + s])] = v;
}

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

// Extracts the integer following `key=` in the header, if present.
bool header_int(const std::string& header, const std::string& key, int& out) {
  std::size_t pos = 0;
  while ((pos = header.find(key, pos)) != std::string::npos) {
    // Reject matches inside a longer key (e.g. "NORB" inside "XNORB").
    const bool boundary = pos == 0 || !std::isalnum(static_cast<unsigned char>(header[pos - 1]));
    std::size_t i = pos + key.size();
    while (i < header.size() && std::isspace(static_cast<unsigned char>(header[i]))) ++i;
    if (boundary && i < header.size() && header[i] == '=') {
      ++i;
      while (i < header.size() && std::isspace(static_cast<unsigned char>(header[i]))) ++i;
      const char* first = header.data() + i;
      const char* last = header.data() + header.size();
      auto [ptr, ec] = std::from_chars(first, last, out);
      return ec == std::errc() && ptr != first;
    }
    pos += key.size();
  }
  return false;
}

double parse_value(std::string tok, std::size_t line) {
  // Fortran writers emit D exponents.
  std::replace(tok.begin(), tok.end(), 'D', 'E');
  std::replace(tok.begin(), tok.end(), 'd', 'e');
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("invalid integral value '" + tok + "'", line);
  return v;
}

long parse_index(const std::string& tok, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("invalid orbital index '" + tok + "'", line);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

FcidumpData parse_fcidump(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::string header;
  bool header_open = false;
  bool header_closed = false;
  std::size_t header_start = 0;

  while (!header_closed && std::getline(in, line)) {
    ++lineno;
    std::string u = upper(line);
    if (!header_open) {
      if (u.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto pos = u.find("&FCI");
      if (pos == std::string::npos) throw ParseError("expected '&FCI' header", lineno);
      header_open = true;
      header_start = lineno;
      u = u.substr(pos + 4);
    }
    const auto end_pos = std::min(u.find("&END"), u.find('/'));
    if (end_pos != std::string::npos) {
      header += ' ' + u.substr(0, end_pos);
      header_closed = true;
    } else {
      header += ' ' + u;
    }
  }
  if (!header_open) throw ParseError("empty FCIDUMP stream", lineno);
  if (!header_closed) throw ParseError("unterminated FCIDUMP header", header_start);

  int norb = 0;
  FcidumpData out;
  if (!header_int(header, "NORB", norb) || norb <= 0)
    throw ParseError("header lacks a valid NORB", header_start);
  if (norb > 64) throw RangeError("NORB=" + std::to_string(norb) + " exceeds the 64-orbital limit");
  if (!header_int(header, "NELEC", out.nelec) || out.nelec < 0)
    throw ParseError("header lacks a valid NELEC", header_start);
  if (!header_int(header, "MS2", out.ms2)) out.ms2 = 0;

  IntegralTable table(static_cast<std::size_t>(norb));
  const std::size_t n = table.norb();
  std::vector<char> h_set(n * n, 0);
  std::vector<char> eri_set(table.eri_storage_size(), 0);
  bool core_set = false;
  auto slot = [](std::size_t p, std::size_t q) {
    return p >= q ? p * (p + 1) / 2 + q : q * (q + 1) / 2 + p;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok[5];
    int ntok = 0;
    while (ntok < 5 && ls >> tok[ntok]) ++ntok;
    if (ntok == 0) continue;
    std::string extra;
    if (ntok < 5 || (ls >> extra))
      throw ParseError("expected 'value i j k l'", lineno);

    const double v = parse_value(tok[0], lineno);
    long idx[4];
    for (int k = 0; k < 4; ++k) {
      idx[k] = parse_index(tok[k + 1], lineno);
      if (idx[k] < 0 || idx[k] > norb)
        throw RangeError("orbital index " + std::to_string(idx[k]) + " outside [0, " +
                         std::to_string(norb) + "] (line " + std::to_string(lineno) + ")");
    }
    const auto [i, j, k, l] = std::tuple{idx[0], idx[1], idx[2], idx[3]};
    if (i > 0 && j > 0 && k > 0 && l > 0) {
      const std::size_t p = i - 1, q = j - 1, r = k - 1, s = l - 1;
      const std::size_t c = [&] {
        const std::size_t a = slot(p, q), b = slot(r, s);
        return a >= b ? a * (a + 1) / 2 + b : b * (b + 1) / 2 + a;
      }();
      if (eri_set[c] && table.eri(p, q, r, s) != v) ++out.conflicting_duplicates;
      eri_set[c] = 1;
      table.set_eri(p, q, r, s, v);
    } else if (i > 0 && j > 0 && k == 0 && l == 0) {
      const std::size_t p = i - 1, q = j - 1;
      if (h_set[slot(p, q)] && table.h(p, q) != v) ++out.conflicting_duplicates;
      h_set[slot(p, q)] = 1;
      table.set_h(p, q, v);
    } else if (i == 0 && j == 0 && k == 0 && l == 0) {
      if (core_set && table.e_core() != v) ++out.conflicting_duplicates;
      core_set = true;
      table.set_e_core(v);
    } else if (i > 0 && j == 0 && k == 0 && l == 0) {
      // Orbital energy record; not part of the Hamiltonian.
    } else {
      throw ParseError("unrecognized index pattern", lineno);
    }
  }
  out.table = std::move(table);
  return out;
}

FcidumpData read_fcidump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open FCIDUMP file '" + path + "'", 0);
  try {
    return parse_fcidump(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  } catch (const RangeError& e) {
    throw RangeError(path + ": " + e.what());
  }
}

void write_fcidump(std::ostream& out, const IntegralTable& t, int nelec, int ms2) {
  const std::size_t n = t.norb();
  out << " &FCI NORB=" << n << ",NELEC=" << nelec << ",MS2=" << ms2 << ",\n  ORBSYM=";
  for (std::size_t p = 0; p < n; ++p) out << "1,";
  out << "\n  ISYM=1,\n &END\n";
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r <= p; ++r)
        for (std::size_t s = 0; s <= (r == p ? q : r); ++s) {
          const double v = t.eri(p, q, r, s);
          if (v != 0.0)
            out << format_double(v) << ' ' << p + 1 << ' ' << q + 1 << ' ' << r + 1 << ' '
                << s + 1 << '\n';
        }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      if (t.h(p, q) != 0.0)
        out << format_double(t.h(p, q)) << ' ' << p + 1 << ' ' << q + 1 << " 0 0\n";
  out << format_double(t.e_core()) << " 0 0 0 0\n";
}

IntegralTable random_integrals(std::size_t norb, std::uint64_t seed) {
  IntegralTable t(norb);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t p = 0; p < norb; ++p)
    for (std::size_t q = 0; q <= p; ++q) t.set_h(p, q, sym(rng));
  for (std::size_t p = 0; p < norb; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r <= p; ++r)
        for (std::size_t s = 0; s <= (r == p ? q : r); ++s)
          t.set_eri(p, q, r, s, 0.1 * unit(rng));
  return t;
}

IntegralTable hubbard_dimer(double t, double u) {
  IntegralTable table(2);
  table.set_h(0, 1, -t);
  table.set_eri(0, 0, 0, 0, u);
  table.set_eri(1, 1, 1, 1, u);
  return table;
}

}  // namespace sbd
