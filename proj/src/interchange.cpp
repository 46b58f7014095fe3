#include "eppa/interchange.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace eppa {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw input_error("line " + std::to_string(line) + ": " + msg);
}

bool is_ident(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha((unsigned char)s[0]) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

// One comment-stripped, non-blank input line.
struct Line {
  int no;
  std::string text;
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    size_t a = raw.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = raw.find_last_not_of(" \t\r");
    out.push_back({no, raw.substr(a, b - a + 1)});
  }
  return out;
}

// Splits on whitespace after padding the listed punctuation characters so
// they become tokens of their own.
std::vector<std::string> tokens(const std::string& s, const std::string& punct) {
  std::string padded;
  for (char c : s) {
    if (punct.find(c) != std::string::npos) {
      padded += ' ';
      padded += c;
      padded += ' ';
    } else if (c == ',') {
      padded += ' ';
    } else {
      padded += c;
    }
  }
  std::vector<std::string> out;
  std::istringstream in(padded);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// True when `line` starts with `key` followed by optional space; the
// remainder after the key is stored in `rest`.
bool keyed(const std::string& line, const std::string& key, std::string& rest) {
  if (line.compare(0, key.size(), key) != 0) return false;
  rest = line.substr(key.size());
  return true;
}

Vertex parse_vertex(int no, const std::string& t) {
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception&) {
    fail(no, "expected a vertex id, got '" + t + "'");
  }
  if (pos != t.size()) fail(no, "expected a vertex id, got '" + t + "'");
  return (Vertex)v;
}

// Parses juxtaposed cycles "(E U)(F G)" over the declared names into a
// symbol permutation of L.
SymbolPerm parse_cycles(int no, const std::string& text, const Language& L) {
  SymbolPerm p = identity_perm(L.nrel(), L.nfun());
  auto ts = tokens(text, "()");
  size_t i = 0;
  if (ts.empty()) fail(no, "expected at least one cycle");
  // Combined index space: relations first, then functions.
  auto index_of = [&](const std::string& name) -> int {
    if (int r = L.rel_index(name); r >= 0) return r;
    if (int f = L.fun_index(name); f >= 0) return (int)L.nrel() + f;
    fail(no, "unknown symbol '" + name + "' in permutation");
  };
  std::vector<bool> seen(L.nrel() + L.nfun(), false);
  while (i < ts.size()) {
    if (ts[i] != "(") fail(no, "expected '(' in cycle notation");
    ++i;
    std::vector<int> cyc;
    while (i < ts.size() && ts[i] != ")") cyc.push_back(index_of(ts[i++]));
    if (i == ts.size()) fail(no, "unterminated cycle");
    ++i;  // over ')'
    if (cyc.size() < 2) fail(no, "a cycle needs at least two symbols");
    for (int x : cyc) {
      if (seen[x]) fail(no, "symbol repeated across cycles");
      seen[x] = true;
    }
    for (size_t k = 0; k < cyc.size(); ++k) {
      int from = cyc[k], to = cyc[(k + 1) % cyc.size()];
      bool from_rel = from < (int)L.nrel(), to_rel = to < (int)L.nrel();
      if (from_rel != to_rel) fail(no, "a permutation cannot exchange a relation with a function");
      if (from_rel) {
        if (L.rel_arity[from] != L.rel_arity[to]) fail(no, "permuted relations must share arity");
        p.rel_map[from] = to;
      } else {
        p.fun_map[from - (int)L.nrel()] = to - (int)L.nrel();
      }
    }
  }
  return p;
}

// Canonical cycle notation for p over L's names; "" for the identity.
std::string cycles_text(const SymbolPerm& p, const Language& L) {
  size_t n = L.nrel() + L.nfun();
  auto image = [&](size_t i) -> size_t {
    return i < L.nrel() ? (size_t)p.rel_map[i] : L.nrel() + (size_t)p.fun_map[i - L.nrel()];
  };
  auto name = [&](size_t i) -> const std::string& {
    return i < L.nrel() ? L.rel_names[i] : L.fun_names[i - L.nrel()];
  };
  std::string out;
  std::vector<bool> seen(n, false);
  for (size_t i = 0; i < n; ++i) {
    if (seen[i] || image(i) == i) continue;
    out += '(';
    size_t j = i;
    bool first = true;
    do {
      seen[j] = true;
      if (!first) out += ' ';
      out += name(j);
      first = false;
      j = image(j);
    } while (j != i);
    out += ')';
  }
  return out;
}

}  // namespace

Structure parse_structure(const std::string& text) {
  auto lines = split_lines(text);
  size_t li = 0;
  auto need = [&](const char* what) {
    if (li >= lines.size())
      throw input_error(std::string("unexpected end of document: expected ") + what);
  };

  // language:
  need("a 'language:' line");
  std::string rest;
  if (!keyed(lines[li].text, "language:", rest)) fail(lines[li].no, "expected 'language: ...'");
  std::vector<std::string> rel_names, fun_names;
  std::vector<int> rel_arity;
  for (const std::string& t : tokens(rest, "")) {
    size_t slash = t.find('/'), bang = t.find('!');
    if (slash != std::string::npos) {
      std::string name = t.substr(0, slash), ar = t.substr(slash + 1);
      if (!is_ident(name)) fail(lines[li].no, "bad symbol name '" + name + "'");
      int a = 0;
      try {
        a = std::stoi(ar);
      } catch (const std::exception&) {
        a = 0;
      }
      if (a < 1) fail(lines[li].no, "bad arity in '" + t + "'");
      rel_names.push_back(name);
      rel_arity.push_back(a);
    } else if (bang != std::string::npos) {
      std::string name = t.substr(0, bang);
      if (!is_ident(name)) fail(lines[li].no, "bad symbol name '" + name + "'");
      if (t.substr(bang + 1) != "1") fail(lines[li].no, "functions are unary: expected '" + name + "!1'");
      fun_names.push_back(name);
    } else {
      fail(lines[li].no, "expected 'name/arity' or 'name!1', got '" + t + "'");
    }
  }
  {
    std::vector<std::string> all = rel_names;
    all.insert(all.end(), fun_names.begin(), fun_names.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      fail(lines[li].no, "duplicate symbol name");
  }
  ++li;

  // Perm parsing needs symbol-name lookups; group closure is checked by
  // make_language below.
  Language probe;
  probe.rel_names = rel_names;
  probe.rel_arity = rel_arity;
  probe.fun_names = fun_names;
  std::vector<SymbolPerm> perms;
  while (li < lines.size() && keyed(lines[li].text, "group:", rest)) {
    perms.push_back(parse_cycles(lines[li].no, rest, probe));
    ++li;
  }
  Language lang;
  try {
    lang = make_language(rel_names, rel_arity, fun_names, perms);
  } catch (const input_error& e) {
    throw input_error("group block: " + std::string(e.what()));
  }

  // vertices:
  need("a 'vertices:' line");
  if (!keyed(lines[li].text, "vertices:", rest)) fail(lines[li].no, "expected 'vertices: ...'");
  std::vector<Vertex> verts;
  for (const std::string& t : tokens(rest, "")) verts.push_back(parse_vertex(lines[li].no, t));
  std::set<Vertex> vset(verts.begin(), verts.end());
  if (vset.size() != verts.size()) fail(lines[li].no, "duplicate vertex id");
  ++li;

  // rel / fun lines.
  std::vector<std::set<Tuple>> rel(lang.nrel());
  std::vector<std::map<Vertex, std::set<Vertex>>> fun(lang.nfun());
  std::vector<bool> rel_seen(lang.nrel(), false), fun_seen(lang.nfun(), false);
  auto check_vertex = [&](int no, Vertex v) {
    if (!vset.count(v)) fail(no, "vertex " + std::to_string(v) + " is not declared");
    return v;
  };
  for (; li < lines.size(); ++li) {
    int no = lines[li].no;
    if (keyed(lines[li].text, "rel ", rest)) {
      auto colon = rest.find(':');
      if (colon == std::string::npos) fail(no, "expected 'rel NAME: ...'");
      std::string name = rest.substr(0, colon);
      while (!name.empty() && name.back() == ' ') name.pop_back();
      int r = lang.rel_index(name);
      if (r < 0) fail(no, "unknown relation '" + name + "'");
      if (rel_seen[r]) fail(no, "duplicate 'rel " + name + ":' line");
      rel_seen[r] = true;
      auto ts = tokens(rest.substr(colon + 1), "()");
      size_t i = 0;
      while (i < ts.size()) {
        if (ts[i] != "(") fail(no, "expected '(' before a tuple");
        ++i;
        Tuple t;
        while (i < ts.size() && ts[i] != ")") t.push_back(check_vertex(no, parse_vertex(no, ts[i++])));
        if (i == ts.size()) fail(no, "unterminated tuple");
        ++i;
        if ((int)t.size() != lang.rel_arity[r])
          fail(no, "tuple arity mismatch for relation " + name + ": got " +
                       std::to_string(t.size()) + ", declared " + std::to_string(lang.rel_arity[r]));
        rel[r].insert(std::move(t));
      }
    } else if (keyed(lines[li].text, "fun ", rest)) {
      auto colon = rest.find(':');
      if (colon == std::string::npos) fail(no, "expected 'fun NAME: ...'");
      std::string name = rest.substr(0, colon);
      while (!name.empty() && name.back() == ' ') name.pop_back();
      int f = lang.fun_index(name);
      if (f < 0) fail(no, "unknown function '" + name + "'");
      if (fun_seen[f]) fail(no, "duplicate 'fun " + name + ":' line");
      fun_seen[f] = true;
      auto ts = tokens(rest.substr(colon + 1), "{}");
      size_t i = 0;
      while (i < ts.size()) {
        Vertex v = check_vertex(no, parse_vertex(no, ts[i++]));
        if (i >= ts.size() || ts[i] != "->") fail(no, "expected '->' after vertex");
        ++i;
        if (i >= ts.size() || ts[i] != "{") fail(no, "expected '{' after '->'");
        ++i;
        std::set<Vertex> img;
        while (i < ts.size() && ts[i] != "}") img.insert(check_vertex(no, parse_vertex(no, ts[i++])));
        if (i == ts.size()) fail(no, "unterminated image set");
        ++i;
        if (fun[f].count(v)) fail(no, "duplicate entry for vertex " + std::to_string(v));
        fun[f][v] = std::move(img);
      }
    } else {
      fail(no, "expected a 'rel NAME:' or 'fun NAME:' line");
    }
  }

  return make_structure(std::move(lang), std::move(verts), std::move(rel), std::move(fun));
}

std::string serialize_structure(const Structure& S) {
  const Language& L = S.lang;
  for (const std::string& n : L.rel_names)
    if (!is_ident(n)) throw input_error("relation name '" + n + "' is not an identifier");
  for (const std::string& n : L.fun_names)
    if (!is_ident(n)) throw input_error("function name '" + n + "' is not an identifier");

  std::ostringstream out;
  out << "language:";
  for (size_t r = 0; r < L.nrel(); ++r) out << ' ' << L.rel_names[r] << '/' << L.rel_arity[r];
  for (const std::string& n : L.fun_names) out << ' ' << n << "!1";
  out << '\n';
  for (const SymbolPerm& p : L.group)
    if (!p.is_identity()) out << "group: " << cycles_text(p, L) << '\n';
  out << "vertices:";
  for (Vertex v : S.verts) out << ' ' << v;
  out << '\n';
  for (size_t r = 0; r < L.nrel(); ++r) {
    if (S.rel[r].empty()) continue;
    out << "rel " << L.rel_names[r] << ':';
    for (const Tuple& t : S.rel[r]) {
      out << " (";
      for (size_t k = 0; k < t.size(); ++k) out << (k ? " " : "") << t[k];
      out << ')';
    }
    out << '\n';
  }
  for (size_t f = 0; f < L.nfun(); ++f) {
    bool any = false;
    for (const auto& [v, img] : S.fun[f]) {
      if (img.empty()) continue;
      if (!any) out << "fun " << L.fun_names[f] << ':';
      any = true;
      out << ' ' << v << " -> {";
      bool first = true;
      for (Vertex y : img) {
        out << (first ? "" : " ") << y;
        first = false;
      }
      out << '}';
    }
    if (any) out << '\n';
  }
  return out.str();
}

Morphism parse_morphism(const std::string& text, const Language& L) {
  auto lines = split_lines(text);
  Morphism m;
  m.perm = identity_perm(L.nrel(), L.nfun());
  size_t li = 0;
  std::string rest;
  if (li < lines.size() && keyed(lines[li].text, "perm:", rest)) {
    m.perm = parse_cycles(lines[li].no, rest, L);
    ++li;
  }
  std::set<Vertex> range;
  for (; li < lines.size(); ++li) {
    int no = lines[li].no;
    if (!keyed(lines[li].text, "map:", rest)) fail(no, "expected a 'map: u -> v' line");
    auto ts = tokens(rest, "");
    if (ts.size() != 3 || ts[1] != "->") fail(no, "expected 'map: u -> v'");
    Vertex u = parse_vertex(no, ts[0]), v = parse_vertex(no, ts[2]);
    if (m.vmap.count(u)) fail(no, "duplicate map entry for " + std::to_string(u));
    if (!range.insert(v).second) fail(no, "map is not injective: " + std::to_string(v) + " hit twice");
    m.vmap[u] = v;
  }
  return m;
}

std::string serialize_morphism(const Morphism& m, const Language& L) {
  if (m.perm.rel_map.size() != L.nrel() || m.perm.fun_map.size() != L.nfun())
    throw input_error("morphism permutation does not fit the language");
  std::ostringstream out;
  if (!m.perm.is_identity()) out << "perm: " << cycles_text(m.perm, L) << '\n';
  for (const auto& [u, v] : m.vmap) out << "map: " << u << " -> " << v << '\n';
  return out.str();
}

}  // namespace eppa
