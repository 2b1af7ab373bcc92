// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "perfohom/errors.hpp"
#include "perfohom/mesh.hpp"

namespace perfohom
{

namespace
{

constexpr std::string_view kHeader = "perfomesh v1";

void put(std::string &out, double v)
{
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

void put(std::string &out, long long v)
{
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

class LineReader
{
public:
  explicit LineReader(const std::string &text) : in_(text) {}

  // Next line split on whitespace; throws at end of input.
  std::vector<std::string_view> next(const char *what)
  {
    if (!std::getline(in_, line_))
    {
      throw ParseError(std::string("unexpected end of file, expected ") + what, lineno_ + 1);
    }
    lineno_++;
    return split();
  }

  bool try_next(std::vector<std::string_view> &tok)
  {
    while (std::getline(in_, line_))
    {
      lineno_++;
      tok = split();
      if (!tok.empty())
      {
        return true;
      }
    }
    return false;
  }

  std::size_t line() const { return lineno_; }

  template <typename T>
  T number(std::string_view s) const
  {
    T v{};
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    {
      throw ParseError("malformed number '" + std::string(s) + "'", lineno_);
    }
    return v;
  }

  void expect(const std::vector<std::string_view> &tok, std::size_t n, const char *what) const
  {
    if (tok.size() != n)
    {
      throw ParseError(std::string("expected ") + std::to_string(n) + " entries in " + what +
                           ", found " + std::to_string(tok.size()),
                       lineno_);
    }
  }

private:
  std::vector<std::string_view> split() const
  {
    std::vector<std::string_view> tok;
    std::string_view s(line_);
    std::size_t i = 0;
    while (i < s.size())
    {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
      {
        i++;
      }
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
      {
        j++;
      }
      if (j > i)
      {
        tok.push_back(s.substr(i, j - i));
      }
      i = j;
    }
    return tok;
  }

  std::istringstream in_;
  std::string line_;
  std::size_t lineno_ = 0;
};

}  // namespace

std::string format_mesh(const Mesh &mesh, std::span<const NodalField> fields)
{
  std::string out;
  out.reserve(mesh.nodes.size() * 64 + mesh.cells.size() * 8);
  out += kHeader;
  out += "\nnodes ";
  put(out, static_cast<long long>(mesh.nodes.size()));
  out += '\n';
  for (const auto &p : mesh.nodes)
  {
    put(out, p[0]);
    out += ' ';
    put(out, p[1]);
    out += ' ';
    put(out, p[2]);
    out += '\n';
  }
  auto ints = [&](const int *v, std::size_t n)
  {
    for (std::size_t k = 0; k < n; k++)
    {
      if (k)
      {
        out += ' ';
      }
      put(out, static_cast<long long>(v[k]));
    }
    out += '\n';
  };
  const std::size_t npc = mesh.nodes_per_cell(), npf = mesh.nodes_per_facet();
  out += "cells ";
  put(out, static_cast<long long>(mesh.num_cells()));
  out += '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); c++)
  {
    ints(mesh.cells.data() + c * npc, npc);
  }
  for (const auto &[name, g] : mesh.facet_groups)
  {
    out += "group " + name + " ";
    put(out, static_cast<long long>(g.size() / npf));
    out += '\n';
    for (std::size_t f = 0; f < g.size(); f += npf)
    {
      ints(g.data() + f, npf);
    }
  }
  for (int dir = 1; dir <= 3; dir++)
  {
    std::vector<const PeriodicPair *> sel;
    for (const auto &p : mesh.periodic_pairs)
    {
      if (p.direction == dir)
      {
        sel.push_back(&p);
      }
    }
    if (sel.empty())
    {
      continue;
    }
    out += "periodic ";
    put(out, static_cast<long long>(dir));
    out += ' ';
    put(out, static_cast<long long>(sel.size()));
    out += '\n';
    for (const auto *p : sel)
    {
      const int v[2] = {p->master, p->slave};
      ints(v, 2);
    }
  }
  for (const auto &f : fields)
  {
    if (f.values.size() != mesh.nodes.size() * static_cast<std::size_t>(f.components))
    {
      throw InvalidArgument("field '" + f.name + "' does not match the node count");
    }
    out += "field " + f.name + " ";
    put(out, static_cast<long long>(f.components));
    out += '\n';
    for (std::size_t i = 0; i < mesh.nodes.size(); i++)
    {
      for (int k = 0; k < f.components; k++)
      {
        if (k)
        {
          out += ' ';
        }
        put(out, f.values[i * f.components + k]);
      }
      out += '\n';
    }
  }
  return out;
}

Mesh parse_mesh(const std::string &text, std::vector<NodalField> *fields)
{
  LineReader in(text);
  auto tok = in.next("header");
  if (tok.size() != 2 || tok[0] != "perfomesh")
  {
    throw ParseError("missing 'perfomesh' header", in.line());
  }
  if (tok[1] != "v1")
  {
    throw ParseError("unsupported mesh format version '" + std::string(tok[1]) + "'", in.line());
  }
  Mesh mesh;
  tok = in.next("nodes block");
  if (tok.size() != 2 || tok[0] != "nodes")
  {
    throw ParseError("expected 'nodes N'", in.line());
  }
  const auto nn = in.number<std::size_t>(tok[1]);
  mesh.nodes.resize(nn);
  for (std::size_t i = 0; i < nn; i++)
  {
    tok = in.next("node coordinates");
    in.expect(tok, 3, "node line");
    for (int d = 0; d < 3; d++)
    {
      mesh.nodes[i][d] = in.number<double>(tok[d]);
    }
  }
  tok = in.next("cells block");
  if (tok.size() != 2 || tok[0] != "cells")
  {
    throw ParseError("expected 'cells M'", in.line());
  }
  const auto nc = in.number<std::size_t>(tok[1]);
  mesh.dim = 3;
  auto check_index = [&](int v)
  {
    if (v < 0 || static_cast<std::size_t>(v) >= nn)
    {
      throw ParseError("node index " + std::to_string(v) + " out of range", in.line());
    }
    return v;
  };
  for (std::size_t c = 0; c < nc; c++)
  {
    tok = in.next("cell connectivity");
    if (c == 0)
    {
      if (tok.size() != 3 && tok.size() != 4)
      {
        throw ParseError("cells must be triangles or tetrahedra", in.line());
      }
      mesh.dim = static_cast<int>(tok.size()) - 1;
    }
    in.expect(tok, mesh.dim + 1, "cell line");
    for (auto t : tok)
    {
      mesh.cells.push_back(check_index(in.number<int>(t)));
    }
  }
  if (fields)
  {
    fields->clear();
  }
  while (in.try_next(tok))
  {
    if (tok[0] == "group")
    {
      in.expect(tok, 3, "group header");
      auto &g = mesh.facet_groups[std::string(tok[1])];
      const auto k = in.number<std::size_t>(tok[2]);
      for (std::size_t f = 0; f < k; f++)
      {
        auto ft = in.next("facet");
        in.expect(ft, mesh.dim, "facet line");
        for (auto t : ft)
        {
          g.push_back(check_index(in.number<int>(t)));
        }
      }
    }
    else if (tok[0] == "periodic")
    {
      in.expect(tok, 3, "periodic header");
      const int dir = in.number<int>(tok[1]);
      const auto k = in.number<std::size_t>(tok[2]);
      for (std::size_t p = 0; p < k; p++)
      {
        auto pt = in.next("periodic pair");
        in.expect(pt, 2, "periodic pair");
        mesh.periodic_pairs.push_back(
            {check_index(in.number<int>(pt[0])), check_index(in.number<int>(pt[1])), dir});
      }
    }
    else if (tok[0] == "field")
    {
      in.expect(tok, 3, "field header");
      NodalField f;
      f.name = std::string(tok[1]);
      f.components = in.number<int>(tok[2]);
      if (f.components < 1)
      {
        throw ParseError("field needs at least one component", in.line());
      }
      f.values.reserve(nn * f.components);
      for (std::size_t i = 0; i < nn; i++)
      {
        auto vt = in.next("field values");
        in.expect(vt, f.components, "field line");
        for (auto t : vt)
        {
          f.values.push_back(in.number<double>(t));
        }
      }
      if (fields)
      {
        fields->push_back(std::move(f));
      }
    }
    else
    {
      throw ParseError("unknown block '" + std::string(tok[0]) + "'", in.line());
    }
  }
  return mesh;
}

void save_mesh(const Mesh &mesh, const std::filesystem::path &path,
               std::span<const NodalField> fields)
{
  const std::string text = format_mesh(mesh, fields);
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out)
  {
    throw Error("failed writing '" + path.string() + "'");
  }
}

Mesh load_mesh(const std::filesystem::path &path, std::vector<NodalField> *fields)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str(), fields);
}

}  // namespace perfohom
