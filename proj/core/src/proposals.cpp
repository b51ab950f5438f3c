#include "wsoleval/proposals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "wsoleval/error.hpp"
#include "wsoleval/io.hpp"
#include "wsoleval/parallel.hpp"

namespace wsoleval {

const char* to_string(ProposalSource source) {
  switch (source) {
    case ProposalSource::SS: return "ss";
    case ProposalSource::RPN: return "rpn";
    case ProposalSource::CLIP: return "clip";
  }
  return "ss";
}

ProposalSource parse_proposal_source(const std::string& text) {
  if (text == "ss") return ProposalSource::SS;
  if (text == "rpn") return ProposalSource::RPN;
  if (text == "clip") return ProposalSource::CLIP;
  throw ValidationError("unknown proposal source '" + text + "' (expected ss, rpn or clip)");
}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  if (width == 0 || height == 0) throw InvalidArgument("empty image");
  if (rgb_.size() != width * height * 3) {
    throw InvalidArgument("RGB buffer size does not match width x height x 3");
  }
}

namespace {

struct Edge {
  std::uint32_t a;
  std::uint32_t b;
  float weight;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1), internal_(n, 0.0f) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  std::uint32_t join(std::uint32_t a, std::uint32_t b, float weight) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    internal_[a] = weight;
    return a;
  }

  std::size_t size(std::uint32_t root) const { return size_[root]; }
  float internal(std::uint32_t root) const { return internal_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::size_t> size_;
  std::vector<float> internal_;
};

float color_distance(const RgbImage& img, std::size_t x0, std::size_t y0, std::size_t x1,
                     std::size_t y1) {
  float sum = 0.0f;
  for (std::size_t c = 0; c < 3; ++c) {
    const float d = static_cast<float>(img.at(x0, y0, c)) - static_cast<float>(img.at(x1, y1, c));
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<Edge> build_edges(const RgbImage& img) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  std::vector<Edge> edges;
  edges.reserve(w * h * 4);
  auto add = [&](std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    edges.push_back({static_cast<std::uint32_t>(y0 * w + x0), static_cast<std::uint32_t>(y1 * w + x1),
                     color_distance(img, x0, y0, x1, y1)});
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) add(x, y, x + 1, y);
      if (y + 1 < h) add(x, y, x, y + 1);
      if (x + 1 < w && y + 1 < h) add(x, y, x + 1, y + 1);
      if (x > 0 && y + 1 < h) add(x, y, x - 1, y + 1);
    }
  }
  return edges;
}

// Separable 5-tap Gaussian (sigma = 1) with clamped borders.
std::vector<float> smooth_channel(const RgbImage& img, std::size_t channel) {
  static constexpr std::array<float, 5> kernel = {0.0545f, 0.2442f, 0.4026f, 0.2442f, 0.0545f};
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  std::vector<float> tmp(w * h), out(w * h);
  auto clampi = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.0f;
      for (std::ptrdiff_t k = -2; k <= 2; ++k) {
        s += kernel[static_cast<std::size_t>(k + 2)] *
             static_cast<float>(img.at(clampi(static_cast<std::ptrdiff_t>(x) + k, w), y, channel));
      }
      tmp[y * w + x] = s;
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.0f;
      for (std::ptrdiff_t k = -2; k <= 2; ++k) {
        s += kernel[static_cast<std::size_t>(k + 2)] * tmp[clampi(static_cast<std::ptrdiff_t>(y) + k, h) * w + x];
      }
      out[y * w + x] = s;
    }
  }
  return out;
}

// Per pixel, per channel: 8 oriented derivative responses quantized to 10
// bins. Returns bin indices laid out as [pixel][channel][orientation].
std::vector<std::uint8_t> texture_bins(const RgbImage& img) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t per_pixel = 3 * kTextureOrientations;
  std::vector<float> response(w * h * per_pixel, 0.0f);
  std::array<float, kTextureOrientations> cosv{}, sinv{};
  for (std::size_t o = 0; o < kTextureOrientations; ++o) {
    const double theta = static_cast<double>(o) * std::numbers::pi / 4.0;
    cosv[o] = static_cast<float>(std::cos(theta));
    sinv[o] = static_cast<float>(std::sin(theta));
  }
  std::array<float, 3> max_resp{0.0f, 0.0f, 0.0f};
  for (std::size_t c = 0; c < 3; ++c) {
    const std::vector<float> s = smooth_channel(img, c);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const float gx = 0.5f * (s[y * w + std::min(x + 1, w - 1)] - s[y * w + (x > 0 ? x - 1 : 0)]);
        const float gy = 0.5f * (s[std::min(y + 1, h - 1) * w + x] - s[(y > 0 ? y - 1 : 0) * w + x]);
        for (std::size_t o = 0; o < kTextureOrientations; ++o) {
          const float r = std::max(0.0f, cosv[o] * gx + sinv[o] * gy);
          response[(y * w + x) * per_pixel + c * kTextureOrientations + o] = r;
          max_resp[c] = std::max(max_resp[c], r);
        }
      }
    }
  }
  std::vector<std::uint8_t> bins(response.size(), 0);
  for (std::size_t i = 0; i < response.size(); ++i) {
    const std::size_t c = (i % per_pixel) / kTextureOrientations;
    if (max_resp[c] <= 0.0f) continue;
    const auto b = static_cast<std::size_t>(response[i] / max_resp[c] * static_cast<float>(kTextureBins));
    bins[i] = static_cast<std::uint8_t>(std::min(b, kTextureBins - 1));
  }
  return bins;
}

void normalize_l1(std::vector<double>& hist) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  if (total <= 0.0) return;
  for (double& v : hist) v /= total;
}

}  // namespace

Segmentation felzenszwalb_segment(const RgbImage& image, double k, std::size_t min_size) {
  if (!(k > 0.0)) throw InvalidArgument("segmentation scale k must be positive");
  if (min_size < 1) throw InvalidArgument("min_size must be at least 1");
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  const std::size_t n = w * h;

  std::vector<Edge> edges = build_edges(image);
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& l, const Edge& r) { return l.weight < r.weight; });

  UnionFind uf(n);
  std::vector<float> threshold(n, static_cast<float>(k));
  for (const Edge& e : edges) {
    std::uint32_t a = uf.find(e.a);
    std::uint32_t b = uf.find(e.b);
    if (a == b) continue;
    if (e.weight <= threshold[a] && e.weight <= threshold[b]) {
      const std::uint32_t root = uf.join(a, b, e.weight);
      threshold[root] = e.weight + static_cast<float>(k / static_cast<double>(uf.size(root)));
    }
  }
  // Absorb small regions across their cheapest remaining edge.
  for (const Edge& e : edges) {
    const std::uint32_t a = uf.find(e.a);
    const std::uint32_t b = uf.find(e.b);
    if (a != b && (uf.size(a) < min_size || uf.size(b) < min_size)) uf.join(a, b, e.weight);
  }

  Segmentation seg;
  seg.width = w;
  seg.height = h;
  seg.labels.assign(n, 0);
  std::vector<std::uint32_t> remap(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
    if (remap[root] == 0) remap[root] = ++seg.region_count;
    seg.labels[i] = remap[root];
  }

  const std::vector<std::uint8_t> tex = texture_bins(image);
  const std::size_t rc = seg.region_count;
  std::vector<std::size_t> x0(rc, w), y0(rc, h), x1(rc, 0), y1(rc, 0), area(rc, 0);
  std::vector<std::vector<double>> color(rc, std::vector<double>(kColorHistSize, 0.0));
  std::vector<std::vector<double>> texture(rc, std::vector<double>(kTextureHistSize, 0.0));
  const std::size_t per_pixel = 3 * kTextureOrientations;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      const std::size_t r = seg.labels[p] - 1;
      ++area[r];
      x0[r] = std::min(x0[r], x);
      y0[r] = std::min(y0[r], y);
      x1[r] = std::max(x1[r], x + 1);
      y1[r] = std::max(y1[r], y + 1);
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t bin = static_cast<std::size_t>(image.at(x, y, c)) * kColorBins / 256;
        color[r][c * kColorBins + bin] += 1.0;
        for (std::size_t o = 0; o < kTextureOrientations; ++o) {
          const std::size_t tb = tex[p * per_pixel + c * kTextureOrientations + o];
          texture[r][(c * kTextureOrientations + o) * kTextureBins + tb] += 1.0;
        }
      }
    }
  }
  seg.regions.reserve(rc);
  for (std::size_t r = 0; r < rc; ++r) {
    normalize_l1(color[r]);
    normalize_l1(texture[r]);
    seg.regions.push_back({area[r],
                           BBox(static_cast<double>(x0[r]), static_cast<double>(y0[r]),
                                static_cast<double>(x1[r]), static_cast<double>(y1[r])),
                           std::move(color[r]), std::move(texture[r])});
  }
  return seg;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> region_adjacency(const Segmentation& seg) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const std::size_t w = seg.width;
  const std::size_t h = seg.height;
  auto link = [&](std::size_t p, std::size_t q) {
    const std::uint32_t a = seg.labels[p];
    const std::uint32_t b = seg.labels[q];
    if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (x + 1 < w) link(p, p + 1);
      if (y + 1 < h) link(p, p + w);
      if (x + 1 < w && y + 1 < h) link(p, p + w + 1);
      if (x > 0 && y + 1 < h) link(p, p + w - 1);
    }
  }
  return {pairs.begin(), pairs.end()};
}

namespace {

double histogram_intersection(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += std::min(a[i], b[i]);
  return s;
}

BBox union_box(const BBox& a, const BBox& b) {
  return BBox(std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()),
              std::max(a.x_max(), b.x_max()), std::max(a.y_max(), b.y_max()));
}

}  // namespace

SimilarityTerms similarity_terms(const Region& a, const Region& b, std::size_t image_area) {
  if (image_area == 0) throw InvalidArgument("image area must be positive");
  const double img = static_cast<double>(image_area);
  const double sa = static_cast<double>(a.area);
  const double sb = static_cast<double>(b.area);
  SimilarityTerms t{};
  t.color = std::clamp(histogram_intersection(a.color_hist, b.color_hist), 0.0, 1.0);
  t.texture = std::clamp(histogram_intersection(a.texture_hist, b.texture_hist), 0.0, 1.0);
  t.size = std::clamp(1.0 - (sa + sb) / img, 0.0, 1.0);
  t.fill = std::clamp(1.0 - (union_box(a.box, b.box).area() - sa - sb) / img, 0.0, 1.0);
  return t;
}

double similarity(const Region& a, const Region& b, std::size_t image_area,
                  const SimilarityWeights& weights) {
  const SimilarityTerms t = similarity_terms(a, b, image_area);
  return weights.color * t.color + weights.texture * t.texture + weights.size * t.size +
         weights.fill * t.fill;
}

Region merge_regions(const Region& a, const Region& b) {
  Region m;
  m.area = a.area + b.area;
  m.box = union_box(a.box, b.box);
  const double wa = static_cast<double>(a.area) / static_cast<double>(m.area);
  const double wb = static_cast<double>(b.area) / static_cast<double>(m.area);
  auto blend = [&](const std::vector<double>& ha, const std::vector<double>& hb) {
    std::vector<double> out(std::max(ha.size(), hb.size()), 0.0);
    for (std::size_t i = 0; i < ha.size(); ++i) out[i] += wa * ha[i];
    for (std::size_t i = 0; i < hb.size(); ++i) out[i] += wb * hb[i];
    return out;
  };
  m.color_hist = blend(a.color_hist, b.color_hist);
  m.texture_hist = blend(a.texture_hist, b.texture_hist);
  return m;
}

GroupingResult group_regions(std::vector<Region> regions,
                             const std::vector<std::pair<std::uint32_t, std::uint32_t>>& adjacency,
                             const SimilarityFn& similarity_fn, std::uint64_t seed) {
  const auto n = static_cast<std::uint32_t>(regions.size());
  GroupingResult result;
  if (n == 0) return result;

  // Ids are 1-based: initial regions 1..n, merge step s creates n + s.
  std::vector<bool> alive(n + 1, true);
  alive[0] = false;
  std::vector<std::set<std::uint32_t>> neighbours(n + 1);
  // Ordered by similarity descending, then (first, second) ascending.
  using Key = std::tuple<double, std::uint32_t, std::uint32_t>;
  auto key_less = [](const Key& l, const Key& r) {
    if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
    return std::make_pair(std::get<1>(l), std::get<2>(l)) < std::make_pair(std::get<1>(r), std::get<2>(r));
  };
  std::set<Key, decltype(key_less)> queue(key_less);
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pair_sim;
  auto region = [&](std::uint32_t id) -> const Region& { return regions[id - 1]; };
  auto push_pair = [&](std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    if (pair_sim.count({a, b})) return;
    const double s = similarity_fn(region(a), region(b));
    pair_sim[{a, b}] = s;
    queue.emplace(s, a, b);
    neighbours[a].insert(b);
    neighbours[b].insert(a);
  };
  for (const auto& [a, b] : adjacency) {
    if (a == b || a < 1 || b < 1 || a > n || b > n) {
      throw InvalidArgument("adjacency refers to an unknown region id");
    }
    push_pair(a, b);
  }

  while (!queue.empty()) {
    const auto [sim, a, b] = *queue.begin();
    const std::uint32_t merged = static_cast<std::uint32_t>(regions.size()) + 1;
    regions.push_back(merge_regions(region(a), region(b)));
    alive.push_back(true);
    neighbours.emplace_back();
    alive[a] = false;
    alive[b] = false;
    result.merges.push_back({a, b, merged, sim});

    std::set<std::uint32_t> joined;
    for (std::uint32_t side : {a, b}) {
      for (std::uint32_t nb : neighbours[side]) {
        const std::uint32_t lo = std::min(side, nb), hi = std::max(side, nb);
        const auto it = pair_sim.find({lo, hi});
        if (it != pair_sim.end()) {
          queue.erase(Key{it->second, lo, hi});
          pair_sim.erase(it);
        }
        neighbours[nb].erase(side);
        if (nb != a && nb != b && alive[nb]) joined.insert(nb);
      }
      neighbours[side].clear();
    }
    for (std::uint32_t nb : joined) push_pair(nb, merged);
  }

  // Objectness ranks: shuffled initial regions first, then merges in order.
  std::vector<std::uint32_t> initial(n);
  std::iota(initial.begin(), initial.end(), 1u);
  std::mt19937_64 rng(seed);
  for (std::uint32_t i = n; i > 1; --i) {
    const std::uint32_t j = static_cast<std::uint32_t>(rng() % i);
    std::swap(initial[i - 1], initial[j]);
  }
  const double total = static_cast<double>(n + result.merges.size());
  std::vector<ScoredProposal> all;
  all.reserve(n + result.merges.size());
  for (std::uint32_t r = 0; r < n; ++r) {
    all.push_back({region(initial[r]).box, static_cast<double>(r + 1) / total, std::nullopt});
  }
  for (std::size_t s = 0; s < result.merges.size(); ++s) {
    all.push_back({region(result.merges[s].merged).box,
                   static_cast<double>(n + s + 1) / total, std::nullopt});
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredProposal& l, const ScoredProposal& r) {
    return l.objectness > r.objectness;
  });
  for (const auto& p : all) {
    const bool dup = std::any_of(result.proposals.begin(), result.proposals.end(),
                                 [&](const ScoredProposal& q) { return q.box == p.box; });
    if (!dup) result.proposals.push_back(p);
  }
  return result;
}

GroupingResult hierarchical_group(const Segmentation& seg, const SimilarityWeights& weights,
                                  std::uint64_t seed) {
  if (seg.region_count == 0) throw InvalidArgument("segmentation has no regions");
  const std::size_t image_area = seg.width * seg.height;
  return group_regions(
      seg.regions, region_adjacency(seg),
      [&](const Region& a, const Region& b) { return similarity(a, b, image_area, weights); }, seed);
}

std::vector<ScoredProposal> selective_search(const RgbImage& image,
                                             const SelectiveSearchParams& params) {
  const Segmentation seg = felzenszwalb_segment(image, params.k, params.min_size);
  return hierarchical_group(seg, params.weights, params.seed).proposals;
}

std::vector<std::vector<ScoredProposal>> selective_search_all(const std::vector<RgbImage>& images,
                                                              const SelectiveSearchParams& params,
                                                              unsigned threads) {
  std::vector<std::vector<ScoredProposal>> out(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { out[i] = selective_search(images[i], params); });
  return out;
}

IngestReport ingest_proposals(const std::string& path, const ImageDimsLookup& dims) {
  BoxRowsReport rows = read_box_rows(path, RowSchema::Proposal);
  IngestReport report;
  report.issues = std::move(rows.issues);
  std::map<std::string, ProposalSet> by_image;
  std::map<std::string, std::size_t> first_line;
  for (const auto& row : rows.rows) {
    const ProposalSource source = parse_proposal_source(row.source.value_or("ss"));
    auto [it, inserted] = by_image.try_emplace(row.image_id);
    ProposalSet& set = it->second;
    if (inserted) {
      set.image_id = row.image_id;
      set.source = source;
      first_line[row.image_id] = row.line;
    } else if (set.source != source) {
      report.issues.push_back({row.line, "image '" + row.image_id + "' mixes proposal sources (line " +
                                             std::to_string(first_line[row.image_id]) + " says " +
                                             to_string(set.source) + ")"});
      continue;
    }
    BBox box = row.box;
    std::optional<std::pair<int, int>> wh;
    if (row.image_width && row.image_height) {
      wh = std::make_pair(*row.image_width, *row.image_height);
    } else if (dims) {
      wh = dims(row.image_id);
    }
    if (wh) box = clamp_box(box, wh->first, wh->second);
    set.proposals.push_back({box, row.objectness.value_or(0.0), row.classifier_score});
  }
  for (auto& [id, set] : by_image) report.images.push_back(std::move(set));
  std::stable_sort(report.issues.begin(), report.issues.end(),
                   [](const IngestIssue& l, const IngestIssue& r) { return l.line < r.line; });
  return report;
}

}  // namespace wsoleval
