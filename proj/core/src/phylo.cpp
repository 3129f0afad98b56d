#include "repalign/phylo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "repalign/errors.hpp"
#include "repalign/text_format.hpp"

namespace repalign {

ConfusionProfiles confusion_profiles(const AlignmentMatrix& matrix, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const std::size_t m = matrix.m;
  if (m == 0) throw std::invalid_argument("empty matrix");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = matrix.at(i, j);
      if (std::isnan(v)) {
        throw std::invalid_argument("matrix cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") is missing; profiles need a complete matrix");
      }
      if (v < 0.0) {
        throw std::invalid_argument("matrix cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") is negative");
      }
    }
  }
  ConfusionProfiles profiles;
  profiles.m = m;
  profiles.epsilon = epsilon;
  profiles.row_profiles.resize(m * m);
  profiles.col_profiles.resize(m * m);
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    double row_sum = 0.0, col_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row_sum += matrix.at(i, j);
      col_sum += matrix.at(j, i);
    }
    for (std::size_t j = 0; j < m; ++j) {
      profiles.row_profiles[i * m + j] = (matrix.at(i, j) + epsilon) / (row_sum + md * epsilon);
      profiles.col_profiles[i * m + j] = (matrix.at(j, i) + epsilon) / (col_sum + md * epsilon);
    }
  }
  return profiles;
}

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("jsd: length mismatch");
  if (p.empty()) throw std::invalid_argument("jsd: empty distributions");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("jsd: negative probability");
    sp += p[i];
    sq += q[i];
  }
  if (std::fabs(sp - 1.0) > 1e-9 || std::fabs(sq - 1.0) > 1e-9) {
    throw std::invalid_argument("jsd: inputs must sum to 1");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mid = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) acc += 0.5 * p[i] * std::log2(p[i] / mid);
    if (q[i] > 0.0) acc += 0.5 * q[i] * std::log2(q[i] / mid);
  }
  return std::clamp(acc, 0.0, 1.0);
}

DistanceMatrix model_distance_matrix(const AlignmentMatrix& matrix, double alpha, double epsilon) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < matrix.m; ++i) {
    if (std::find(matrix.baselines.begin(), matrix.baselines.end(), matrix.model_names[i]) ==
        matrix.baselines.end()) {
      kept.push_back(i);
    }
  }
  if (kept.size() < 2) {
    throw data_error("fewer than 2 models remain after excluding baselines; no tree distance to compute");
  }
  AlignmentMatrix sub;
  sub.m = kept.size();
  sub.values.resize(sub.m * sub.m);
  for (std::size_t a = 0; a < kept.size(); ++a) {
    sub.model_names.push_back(matrix.model_names[kept[a]]);
    for (std::size_t b = 0; b < kept.size(); ++b) sub.at(a, b) = matrix.at(kept[a], kept[b]);
  }
  const auto profiles = confusion_profiles(sub, epsilon);
  DistanceMatrix dist;
  dist.labels = sub.model_names;
  dist.m = sub.m;
  dist.values.assign(sub.m * sub.m, 0.0);
  for (std::size_t i = 0; i < sub.m; ++i) {
    for (std::size_t j = i + 1; j < sub.m; ++j) {
      const double d = alpha * std::sqrt(jsd(profiles.row(i), profiles.row(j))) +
                       (1.0 - alpha) * std::sqrt(jsd(profiles.col(i), profiles.col(j)));
      dist.at(i, j) = d;
      dist.at(j, i) = d;
    }
  }
  return dist;
}

PhyloTree neighbor_joining(const DistanceMatrix& distances) {
  const std::size_t m = distances.m;
  if (m < 2) throw std::invalid_argument("neighbor joining needs at least 2 leaves");
  if (distances.labels.size() != m || distances.values.size() != m * m) {
    throw std::invalid_argument("malformed distance matrix");
  }
  {
    std::set<std::string> seen(distances.labels.begin(), distances.labels.end());
    if (seen.size() != m) throw std::invalid_argument("leaf labels must be unique");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (std::fabs(distances.at(i, i)) > 0.0) {
      throw std::invalid_argument("distance matrix has a nonzero diagonal at " + distances.labels[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double v = distances.at(i, j);
      if (std::isnan(v) || v < 0.0) {
        throw std::invalid_argument("distance matrix entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is negative or missing");
      }
      if (std::fabs(v - distances.at(j, i)) > 1e-12) {
        throw std::invalid_argument("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
    }
  }

  PhyloTree tree;
  tree.leaf_names = distances.labels;
  const std::size_t max_nodes = 2 * m;  // m leaves + at most m - 2 internals
  std::vector<std::vector<double>> dist(max_nodes, std::vector<double>(max_nodes, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) dist[i][j] = distances.at(i, j);
  }
  std::vector<std::size_t> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = i;
  std::size_t next_node = m;

  while (active.size() > 2) {
    const std::size_t a_count = active.size();
    std::vector<double> r(a_count, 0.0);
    for (std::size_t p = 0; p < a_count; ++p) {
      double acc = 0.0;
      for (std::size_t q = 0; q < a_count; ++q) acc += dist[active[p]][active[q]];
      r[p] = acc;
    }
    const double denom = static_cast<double>(a_count) - 2.0;
    double best_q = 0.0;
    std::size_t best_p = 0, best_s = 1;
    bool first = true;
    for (std::size_t p = 0; p < a_count; ++p) {
      for (std::size_t s = p + 1; s < a_count; ++s) {
        const double q_val = denom * dist[active[p]][active[s]] - r[p] - r[s];
        if (first || q_val < best_q) {
          best_q = q_val;
          best_p = p;
          best_s = s;
          first = false;
        }
      }
    }
    const std::size_t node_i = active[best_p];
    const std::size_t node_j = active[best_s];
    const double d_ij = dist[node_i][node_j];
    double l_i = 0.5 * (d_ij + (r[best_p] - r[best_s]) / denom);
    double l_j = d_ij - l_i;
    // Negative branch lengths are clamped; the slack moves to the sibling so
    // the pair still spans d_ij.
    if (l_i < 0.0) {
      l_i = 0.0;
      l_j = d_ij;
    }
    if (l_j < 0.0) {
      l_j = 0.0;
      l_i = std::max(d_ij, 0.0);
    }
    const std::size_t u = next_node++;
    tree.edges.push_back({node_i, u, l_i});
    tree.edges.push_back({node_j, u, l_j});
    for (std::size_t p = 0; p < a_count; ++p) {
      const std::size_t k = active[p];
      if (k == node_i || k == node_j) continue;
      const double d_uk = 0.5 * (dist[node_i][k] + dist[node_j][k] - d_ij);
      dist[u][k] = d_uk;
      dist[k][u] = d_uk;
    }
    std::vector<std::size_t> next_active;
    next_active.reserve(a_count - 1);
    for (const std::size_t k : active) {
      if (k != node_i && k != node_j) next_active.push_back(k);
    }
    next_active.push_back(u);
    active = std::move(next_active);
  }

  const std::size_t a = active[0], b = active[1];
  tree.edges.push_back({a, b, std::max(dist[a][b], 0.0)});
  tree.final_edge = tree.edges.size() - 1;
  tree.node_count = next_node;
  return tree;
}

namespace {

std::string format_branch_length(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  return s.empty() ? "0" : s;
}

bool needs_quoting(const std::string& label) {
  if (label.empty()) return true;
  return label.find_first_of(" \t\r\n()[]':;,") != std::string::npos;
}

std::string newick_label(const std::string& label) {
  if (!needs_quoting(label)) return label;
  std::string out = "'";
  for (const char c : label) {
    if (c == '\'') out += "''";
    else out += c;
  }
  out += "'";
  return out;
}

struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> next;
};

Adjacency build_adjacency(const PhyloTree& tree) {
  Adjacency adj;
  adj.next.resize(tree.node_count);
  for (const auto& edge : tree.edges) {
    adj.next[edge.a].push_back({edge.b, edge.length});
    adj.next[edge.b].push_back({edge.a, edge.length});
  }
  return adj;
}

std::string min_leaf_label(const PhyloTree& tree, const Adjacency& adj, std::size_t node,
                           std::size_t parent) {
  if (node < tree.leaf_names.size()) return tree.leaf_names[node];
  std::string best;
  bool first = true;
  for (const auto& [child, length] : adj.next[node]) {
    if (child == parent) continue;
    std::string candidate = min_leaf_label(tree, adj, child, node);
    if (first || candidate < best) {
      best = std::move(candidate);
      first = false;
    }
  }
  return best;
}

std::string serialize_subtree(const PhyloTree& tree, const Adjacency& adj, std::size_t node,
                              std::size_t parent, int precision) {
  if (node < tree.leaf_names.size()) return newick_label(tree.leaf_names[node]);
  std::vector<std::pair<std::string, std::size_t>> children;  // (min label, index into adj)
  for (std::size_t c = 0; c < adj.next[node].size(); ++c) {
    if (adj.next[node][c].first == parent) continue;
    children.push_back({min_leaf_label(tree, adj, adj.next[node][c].first, node), c});
  }
  std::sort(children.begin(), children.end());
  std::string out = "(";
  for (std::size_t c = 0; c < children.size(); ++c) {
    if (c) out += ',';
    const auto& [child, length] = adj.next[node][children[c].second];
    out += serialize_subtree(tree, adj, child, node, precision);
    out += ':';
    out += format_branch_length(length, precision);
  }
  out += ')';
  return out;
}

}  // namespace

std::string to_newick(const PhyloTree& tree, int precision) {
  if (tree.edges.empty() || tree.final_edge >= tree.edges.size()) {
    throw std::invalid_argument("tree has no final edge to root at");
  }
  const Adjacency adj = build_adjacency(tree);
  const auto& final_edge = tree.edges[tree.final_edge];
  const double half = 0.5 * final_edge.length;
  // The final join becomes the root: both endpoints hang from its midpoint.
  struct Side {
    std::string min_label;
    std::string text;
  };
  Side sides[2];
  const std::size_t nodes[2] = {final_edge.a, final_edge.b};
  for (int s = 0; s < 2; ++s) {
    // Serializing "through" the final edge: the opposite endpoint acts as parent.
    sides[s].min_label = min_leaf_label(tree, adj, nodes[s], nodes[1 - s]);
    sides[s].text = serialize_subtree(tree, adj, nodes[s], nodes[1 - s], precision);
  }
  if (sides[1].min_label < sides[0].min_label) std::swap(sides[0], sides[1]);
  const std::string len = format_branch_length(half, precision);
  return "(" + sides[0].text + ":" + len + "," + sides[1].text + ":" + len + ");";
}

namespace {

struct NewickParser {
  const std::string& text;
  std::size_t pos = 0;

  explicit NewickParser(const std::string& t) : text(t) {}

  char peek() {
    if (pos >= text.size()) throw data_error("newick: unexpected end of input");
    return text[pos];
  }

  void expect(char c) {
    if (peek() != c) {
      throw data_error("newick: expected '" + std::string(1, c) + "' at position " + std::to_string(pos));
    }
    ++pos;
  }

  std::string parse_label() {
    if (peek() == '\'') {
      ++pos;
      std::string out;
      for (;;) {
        if (pos >= text.size()) throw data_error("newick: unterminated quoted label");
        const char c = text[pos++];
        if (c == '\'') {
          if (pos < text.size() && text[pos] == '\'') {
            out += '\'';
            ++pos;
            continue;
          }
          return out;
        }
        out += c;
      }
    }
    std::string out;
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == ',' || c == ')' || c == ':' || c == ';' || c == '(') break;
      out += c;
      ++pos;
    }
    if (out.empty()) throw data_error("newick: empty label at position " + std::to_string(pos));
    return out;
  }

  double parse_length() {
    const std::size_t start = pos;
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == ',' || c == ')' || c == ';') break;
      ++pos;
    }
    return parse_double(std::string_view(text).substr(start, pos - start));
  }
};

struct ParsedNode {
  std::string label;                                     // leaves only
  std::vector<std::pair<std::size_t, double>> children;  // (node index, branch length)
};

std::size_t parse_clade(NewickParser& parser, std::vector<ParsedNode>& nodes) {
  if (parser.peek() == '(') {
    parser.expect('(');
    ParsedNode node;
    const std::size_t self = nodes.size();
    nodes.push_back(node);
    for (;;) {
      const std::size_t child = parse_clade(parser, nodes);
      parser.expect(':');
      const double length = parser.parse_length();
      nodes[self].children.push_back({child, length});
      if (parser.peek() == ',') {
        parser.expect(',');
        continue;
      }
      break;
    }
    parser.expect(')');
    return self;
  }
  ParsedNode leaf;
  leaf.label = parser.parse_label();
  nodes.push_back(leaf);
  return nodes.size() - 1;
}

}  // namespace

PhyloTree parse_newick(const std::string& text) {
  // Leading whitespace and [...] comment blocks (used for provenance) are
  // skipped; the tree itself starts at the first structural character.
  std::size_t start = 0;
  while (start < text.size()) {
    const char c = text[start];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++start;
      continue;
    }
    if (c == '[') {
      const std::size_t close = text.find(']', start);
      if (close == std::string::npos) throw data_error("newick: unterminated comment");
      start = close + 1;
      continue;
    }
    break;
  }
  const std::string body = text.substr(start);
  NewickParser parser(body);
  std::vector<ParsedNode> nodes;
  const std::size_t root = parse_clade(parser, nodes);
  parser.expect(';');
  if (nodes[root].children.size() != 2) {
    throw data_error("newick: expected a binary root");
  }
  // Leaf ids first (appearance order), then internals.
  std::vector<std::size_t> id(nodes.size());
  PhyloTree tree;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].children.empty()) {
      id[i] = tree.leaf_names.size();
      tree.leaf_names.push_back(nodes[i].label);
    }
  }
  std::size_t next_internal = tree.leaf_names.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].children.empty() && i != root) id[i] = next_internal++;
  }
  tree.node_count = next_internal;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == root) continue;
    for (const auto& [child, length] : nodes[i].children) {
      tree.edges.push_back({id[child], id[i], length});
    }
  }
  // Merge the root's two child branches back into the final edge.
  const auto& left = nodes[root].children[0];
  const auto& right = nodes[root].children[1];
  tree.edges.push_back({id[left.first], id[right.first], left.second + right.second});
  tree.final_edge = tree.edges.size() - 1;
  if (tree.leaf_names.size() < 2) throw data_error("newick: need at least 2 leaves");
  {
    std::set<std::string> seen(tree.leaf_names.begin(), tree.leaf_names.end());
    if (seen.size() != tree.leaf_names.size()) throw data_error("newick: duplicate leaf labels");
  }
  return tree;
}

std::vector<double> leaf_distance_matrix(const PhyloTree& tree) {
  const std::size_t m = tree.leaf_names.size();
  const Adjacency adj = build_adjacency(tree);
  std::vector<double> out(m * m, 0.0);
  std::vector<double> dist(tree.node_count);
  std::vector<bool> seen(tree.node_count);
  for (std::size_t leaf = 0; leaf < m; ++leaf) {
    std::fill(seen.begin(), seen.end(), false);
    std::vector<std::size_t> stack{leaf};
    dist[leaf] = 0.0;
    seen[leaf] = true;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (const auto& [next, length] : adj.next[node]) {
        if (seen[next]) continue;
        seen[next] = true;
        dist[next] = dist[node] + length;
        stack.push_back(next);
      }
    }
    for (std::size_t other = 0; other < m; ++other) out[leaf * m + other] = dist[other];
  }
  return out;
}

}  // namespace repalign
