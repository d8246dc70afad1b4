// Copyright 2026 The Wikiner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WIKINER_WIKIGRAPH_HPP
#define WIKINER_WIKIGRAPH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>
#include <wikiner/tokenizer.hpp>

namespace wikiner
{

using NodeId = std::int64_t;

enum class NodeKind : std::uint8_t { article, category };

struct WikiNode {
    NodeId id = 0;
    std::string title;
    NodeKind kind = NodeKind::article;
    std::vector<NodeId> parents;

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(id, title, kind, parents);
    }
};

// Article/category graph. Nodes are stored densely in id order; edges point
// from a node to the categories it belongs to.
class WikiGraph
{
public:
    WikiGraph() = default;

    explicit WikiGraph(std::vector<WikiNode> nodes) : nodes_(std::move(nodes)) { rebuild(); }

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const std::vector<WikiNode> &nodes() const { return nodes_; }
    [[nodiscard]] const WikiNode &node(std::size_t pos) const { return nodes_[pos]; }

    [[nodiscard]] std::optional<std::size_t> position(NodeId id) const
    {
        auto it = position_.find(id);
        if (it == position_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] const WikiNode *find(NodeId id) const
    {
        auto p = position(id);
        return p ? &nodes_[*p] : nullptr;
    }

    [[nodiscard]] std::optional<NodeId> find_title(const std::string &title, NodeKind kind) const
    {
        const auto &index = kind == NodeKind::article ? articles_ : categories_;
        auto it = index.find(title);
        if (it == index.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] const std::vector<std::size_t> &parent_positions(std::size_t pos) const { return parents_[pos]; }
    [[nodiscard]] const std::vector<std::size_t> &child_positions(std::size_t pos) const { return children_[pos]; }

    [[nodiscard]] std::size_t article_count() const { return articles_.size(); }
    [[nodiscard]] std::size_t category_count() const { return categories_.size(); }

    // Prefix matches first, then substring matches, case-insensitive; each
    // group in title order.
    [[nodiscard]] std::vector<NodeId> search(const std::string &query, std::size_t limit = 50) const
    {
        auto q = unicode::to_lower(query);
        std::vector<std::pair<std::string, NodeId>> prefix, infix;
        for (const auto &n : nodes_) {
            auto t = unicode::to_lower(n.title);
            auto at = t.find(q);
            if (at == 0) {
                prefix.emplace_back(n.title, n.id);
            } else if (at != std::string::npos) {
                infix.emplace_back(n.title, n.id);
            }
        }
        std::sort(prefix.begin(), prefix.end());
        std::sort(infix.begin(), infix.end());
        std::vector<NodeId> out;
        for (auto *group : {&prefix, &infix}) {
            for (auto &[title, id] : *group) {
                if (out.size() >= limit) {
                    return out;
                }
                out.push_back(id);
            }
        }
        return out;
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(nodes_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(nodes_);
        rebuild();
    }

private:
    void rebuild()
    {
        std::sort(nodes_.begin(), nodes_.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
        position_.clear();
        articles_.clear();
        categories_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            check(position_.emplace(nodes_[i].id, i).second, "duplicate node id " + std::to_string(nodes_[i].id));
            auto &index = nodes_[i].kind == NodeKind::article ? articles_ : categories_;
            index[nodes_[i].title] = nodes_[i].id;
        }
        parents_.assign(nodes_.size(), {});
        children_.assign(nodes_.size(), {});
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto &ps = nodes_[i].parents;
            std::sort(ps.begin(), ps.end());
            ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
            // Only categories can be parents; anything else is dangling.
            std::erase_if(ps, [&](NodeId p) {
                auto it = position_.find(p);
                return it == position_.end() || nodes_[it->second].kind != NodeKind::category;
            });
            for (NodeId p : ps) {
                auto pp = position_.at(p);
                parents_[i].push_back(pp);
                children_[pp].push_back(i);
            }
        }
    }

    std::vector<WikiNode> nodes_;
    std::unordered_map<NodeId, std::size_t> position_;
    std::unordered_map<std::string, NodeId> articles_;
    std::unordered_map<std::string, NodeId> categories_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
};

struct LabelStats {
    std::uint64_t occurrences = 0;
    std::uint64_t links = 0;
    std::map<NodeId, std::uint64_t> senses;

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(occurrences, links, senses);
    }
};

// Per-label link counts. Keys are normalized label text (see normalize_label).
class AnchorStatistics
{
public:
    void add_link(const std::string &label, NodeId concept_id)
    {
        auto &s = labels_[label];
        ++s.links;
        ++s.occurrences;
        ++s.senses[concept_id];
        max_tokens_ = std::max(max_tokens_, split(label, ' ').size());
    }

    // Unlinked occurrence of an already known label.
    void add_occurrence(const std::string &label) { ++labels_.at(label).occurrences; }

    // Direct setter used by fixtures.
    void set(const std::string &label, LabelStats stats)
    {
        max_tokens_ = std::max(max_tokens_, split(label, ' ').size());
        labels_[label] = std::move(stats);
    }

    [[nodiscard]] const LabelStats *find(const std::string &label) const
    {
        auto it = labels_.find(label);
        return it == labels_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] bool contains(const std::string &label) const { return labels_.count(label) != 0; }
    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] std::size_t max_label_tokens() const { return max_tokens_; }
    [[nodiscard]] const std::unordered_map<std::string, LabelStats> &labels() const { return labels_; }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(labels_, max_tokens_);
    }

private:
    std::unordered_map<std::string, LabelStats> labels_;
    std::size_t max_tokens_ = 0;
};

// For every concept, the sorted set of distinct articles linking to it.
class InlinkIndex
{
public:
    void add(NodeId target, NodeId source) { pending_[target].insert(source); }

    void set(NodeId target, std::vector<NodeId> sources)
    {
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        inlinks_[target] = std::move(sources);
    }

    void set_total_articles(std::uint64_t n) { total_articles_ = n; }

    void finalize()
    {
        for (auto &[target, sources] : pending_) {
            inlinks_[target] = std::vector<NodeId>(sources.begin(), sources.end());
        }
        pending_.clear();
    }

    [[nodiscard]] const std::vector<NodeId> &inlinks(NodeId c) const
    {
        static const std::vector<NodeId> empty;
        auto it = inlinks_.find(c);
        return it == inlinks_.end() ? empty : it->second;
    }

    [[nodiscard]] std::size_t count(NodeId c) const { return inlinks(c).size(); }

    [[nodiscard]] std::size_t intersection(NodeId a, NodeId b) const
    {
        const auto &x = inlinks(a);
        const auto &y = inlinks(b);
        std::size_t n = 0;
        auto i = x.begin();
        auto j = y.begin();
        while (i != x.end() && j != y.end()) {
            if (*i < *j) {
                ++i;
            } else if (*j < *i) {
                ++j;
            } else {
                ++n;
                ++i;
                ++j;
            }
        }
        return n;
    }

    [[nodiscard]] std::uint64_t total_articles() const { return total_articles_; }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(inlinks_, total_articles_);
    }

private:
    std::unordered_map<NodeId, std::vector<NodeId>> inlinks_;
    std::unordered_map<NodeId, std::set<NodeId>> pending_;
    std::uint64_t total_articles_ = 0;
};

// ---------------------------------------------------------------------------
// Dump ingestion

struct PageLink {
    std::string target;
    std::string anchor;
};

// One JSONL record:
//   {id, title, ns (0 article, 14 category), redirect?, categories: [title],
//    links: [{target, anchor}], text?}
// `text` is the page's plain text outside links; it is only used to count
// unlinked label occurrences.
struct PageRecord {
    NodeId id = 0;
    std::string title;
    int ns = 0;
    std::optional<std::string> redirect;
    std::vector<std::string> categories;
    std::vector<PageLink> links;
    std::string text;
};

inline constexpr int kArticleNamespace = 0;
inline constexpr int kCategoryNamespace = 14;

// Category titles are stored without their namespace prefix.
inline std::string strip_category_prefix(std::string title)
{
    for (std::string_view prefix : {"Category:", "Kategoria:", "category:", "kategoria:"}) {
        if (title.rfind(prefix, 0) == 0) {
            return std::string(trim(std::string_view(title).substr(prefix.size())));
        }
    }
    return title;
}

inline PageRecord page_from_json(const nlohmann::json &j)
{
    PageRecord r;
    r.id = j.at("id").get<NodeId>();
    r.title = j.at("title").get<std::string>();
    r.ns = j.value("ns", 0);
    if (j.contains("redirect") && !j.at("redirect").is_null()) {
        r.redirect = j.at("redirect").get<std::string>();
    }
    if (j.contains("categories")) {
        r.categories = j.at("categories").get<std::vector<std::string>>();
    }
    if (j.contains("links")) {
        for (const auto &l : j.at("links")) {
            PageLink link;
            link.target = l.at("target").get<std::string>();
            link.anchor = l.value("anchor", link.target);
            r.links.push_back(std::move(link));
        }
    }
    r.text = j.value("text", std::string());
    return r;
}

inline nlohmann::json page_to_json(const PageRecord &r)
{
    nlohmann::json j{{"id", r.id}, {"title", r.title}, {"ns", r.ns}, {"categories", r.categories}};
    if (r.redirect) {
        j["redirect"] = *r.redirect;
    }
    auto links = nlohmann::json::array();
    for (const auto &l : r.links) {
        links.push_back({{"target", l.target}, {"anchor", l.anchor}});
    }
    j["links"] = std::move(links);
    if (!r.text.empty()) {
        j["text"] = r.text;
    }
    return j;
}

inline std::vector<PageRecord> read_jsonl(std::istream &in)
{
    std::vector<PageRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto t = trim(line); t.empty() || t[0] == '#') {
            continue;
        }
        try {
            out.push_back(page_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception &e) {
            throw FormatError(std::string("bad page record: ") + e.what(), line_no);
        }
    }
    return out;
}

inline void write_jsonl(std::ostream &out, const std::vector<PageRecord> &pages)
{
    for (const auto &p : pages) {
        out << page_to_json(p).dump() << '\n';
    }
}

struct ImportReport {
    std::size_t pages = 0;
    std::size_t articles = 0;
    std::size_t categories = 0;
    std::size_t redirects = 0;
    std::size_t skipped_namespace = 0;
    std::size_t duplicate_titles = 0;
    std::size_t links = 0;
    std::size_t dropped_links = 0;
    std::size_t dangling_parents = 0;

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(pages, articles, categories, redirects, skipped_namespace, duplicate_titles, links, dropped_links,
           dangling_parents);
    }
};

struct KnowledgeBase {
    WikiGraph graph;
    AnchorStatistics anchors;
    InlinkIndex inlinks;
    // Redirect title -> resolved article id.
    std::map<std::string, NodeId> redirects;
    ImportReport report;

    // Article id for a link target, following redirects.
    [[nodiscard]] std::optional<NodeId> resolve_target(const std::string &title) const
    {
        if (auto id = graph.find_title(title, NodeKind::article)) {
            return id;
        }
        if (auto it = redirects.find(title); it != redirects.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(graph, anchors, inlinks, redirects, report);
    }
};

// Builds the graph and link statistics. Redirects are collapsed onto their
// targets before anything is counted; a later record with an already seen
// title replaces the earlier one.
inline KnowledgeBase import_dump(const std::vector<PageRecord> &pages)
{
    KnowledgeBase kb;
    auto &rep = kb.report;
    rep.pages = pages.size();

    std::map<std::string, const PageRecord *> articles, categories;
    std::map<std::string, std::string> redirects;
    for (const auto &p : pages) {
        if (p.ns == kArticleNamespace) {
            if (p.redirect) {
                redirects[p.title] = *p.redirect;
                continue;
            }
            if (!articles.emplace(p.title, &p).second) {
                spdlog::warn("duplicate article title '{}': keeping page {}", p.title, p.id);
                ++rep.duplicate_titles;
                articles[p.title] = &p;
            }
        } else if (p.ns == kCategoryNamespace) {
            auto title = strip_category_prefix(p.title);
            if (!categories.emplace(title, &p).second) {
                spdlog::warn("duplicate category title '{}': keeping page {}", title, p.id);
                ++rep.duplicate_titles;
                categories[title] = &p;
            }
        } else {
            ++rep.skipped_namespace;
        }
    }
    rep.redirects = redirects.size();

    // Follows redirect chains; cycles resolve to nothing.
    auto resolve_article = [&](const std::string &title) -> const PageRecord * {
        std::string t = title;
        for (std::size_t hops = 0; hops <= redirects.size(); ++hops) {
            if (auto it = articles.find(t); it != articles.end()) {
                return it->second;
            }
            auto r = redirects.find(t);
            if (r == redirects.end()) {
                return nullptr;
            }
            t = r->second;
        }
        return nullptr;
    };

    std::vector<WikiNode> nodes;
    auto add_node = [&](const PageRecord &p, NodeKind kind, const std::string &title) {
        WikiNode n{p.id, title, kind, {}};
        for (const auto &c : p.categories) {
            auto it = categories.find(strip_category_prefix(c));
            if (it == categories.end()) {
                ++rep.dangling_parents;
                continue;
            }
            n.parents.push_back(it->second->id);
        }
        nodes.push_back(std::move(n));
    };
    for (const auto &[title, p] : articles) {
        add_node(*p, NodeKind::article, title);
    }
    for (const auto &[title, p] : categories) {
        add_node(*p, NodeKind::category, title);
    }
    rep.articles = articles.size();
    rep.categories = categories.size();
    kb.graph = WikiGraph(std::move(nodes));

    for (const auto &[title, p] : articles) {
        for (const auto &l : p->links) {
            ++rep.links;
            const PageRecord *target = resolve_article(l.target);
            auto label = normalize_label(l.anchor);
            if (target == nullptr || label.empty()) {
                ++rep.dropped_links;
                continue;
            }
            kb.anchors.add_link(label, target->id);
            kb.inlinks.add(target->id, p->id);
        }
    }
    kb.inlinks.finalize();
    kb.inlinks.set_total_articles(articles.size());
    for (const auto &[title, target] : redirects) {
        if (const PageRecord *p = resolve_article(title)) {
            kb.redirects.emplace(title, p->id);
        }
    }

    const std::size_t max_n = kb.anchors.max_label_tokens();
    for (const auto &[title, p] : articles) {
        if (p->text.empty()) {
            continue;
        }
        auto toks = tokenize(p->text);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            std::string key;
            for (std::size_t n = 1; n <= max_n && i + n <= toks.size(); ++n) {
                if (n > 1) {
                    key += ' ';
                }
                key += toks[i + n - 1];
                if (kb.anchors.contains(key)) {
                    kb.anchors.add_occurrence(key);
                }
            }
        }
    }
    return kb;
}

// ---------------------------------------------------------------------------
// Label propagation

// A node label is one of the main categories or the explicit "none" label,
// represented by nullopt.
using NodeLabel = std::optional<MainCategory>;

inline constexpr std::size_t kLabelSlots = 7; // six categories + none

inline std::size_t label_slot(const NodeLabel &l) { return l ? static_cast<std::size_t>(*l) : 6; }

inline NodeLabel slot_label(std::size_t slot)
{
    return slot < 6 ? NodeLabel(static_cast<MainCategory>(slot)) : std::nullopt;
}

inline std::string label_name(const NodeLabel &l) { return l ? std::string(to_string(*l)) : "none"; }

inline NodeLabel parse_node_label(std::string_view s)
{
    if (s == "none") {
        return std::nullopt;
    }
    auto c = parse_main_category(s);
    if (!c) {
        throw Error("unknown node label '" + std::string(s) + "'");
    }
    return c;
}

enum class ResolutionRule : std::uint8_t {
    seed,          // the node itself is seeded
    shortest_path, // one label at the minimum distance
    frequency,     // several labels, one has the most shortest paths
    tie_break,     // equal path counts, lowest label in category order
    unreachable    // no seeded ancestor
};

inline std::string_view to_string(ResolutionRule r)
{
    constexpr std::array<std::string_view, 5> names = {"seed", "shortest_path", "frequency", "tie_break",
                                                       "unreachable"};
    return names[static_cast<std::size_t>(r)];
}

struct Resolution {
    NodeLabel label;
    ResolutionRule rule = ResolutionRule::unreachable;
    std::uint32_t distance = 0;
    // Number of distinct shortest paths ending at a seed of each label slot.
    std::array<std::uint64_t, kLabelSlots> path_counts{};

    [[nodiscard]] bool labeled() const { return rule != ResolutionRule::unreachable && label.has_value(); }

    friend bool operator==(const Resolution &, const Resolution &) = default;
};

struct Labeling {
    std::map<NodeId, NodeLabel> seeds;
    // Indexed by graph position; nullopt means invalidated since the last
    // propagation.
    std::vector<std::optional<Resolution>> resolved;

    [[nodiscard]] const Resolution *resolution(const WikiGraph &g, NodeId id) const
    {
        auto p = g.position(id);
        if (!p || *p >= resolved.size() || !resolved[*p]) {
            return nullptr;
        }
        return &*resolved[*p];
    }
};

namespace detail
{

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b)
{
    auto s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

} // namespace detail

// Multi-source BFS from the seeds down the child edges. A node's shortest
// path counts are the sums over its parents one step closer to the seeds, so
// every node is finished before its children are visited. Paths never pass
// through a seeded node because the seed itself is always closer.
inline Labeling propagate_labels(const WikiGraph &graph, const std::map<NodeId, NodeLabel> &seeds)
{
    constexpr auto kUnvisited = std::numeric_limits<std::uint32_t>::max();
    const std::size_t n = graph.size();
    std::vector<std::uint32_t> dist(n, kUnvisited);
    std::vector<std::array<std::uint64_t, kLabelSlots>> counts(n);
    std::vector<bool> seeded(n, false);
    std::deque<std::size_t> queue;

    Labeling out;
    out.seeds = seeds;
    for (const auto &[id, label] : seeds) {
        auto p = graph.position(id);
        if (!p) {
            throw Error("seed refers to unknown node " + std::to_string(id));
        }
        seeded[*p] = true;
        dist[*p] = 0;
        counts[*p] = {};
        counts[*p][label_slot(label)] = 1;
        queue.push_back(*p);
    }
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto v : graph.child_positions(u)) {
            if (seeded[v]) {
                continue;
            }
            if (dist[v] == kUnvisited) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
            if (dist[v] == dist[u] + 1) {
                for (std::size_t k = 0; k < kLabelSlots; ++k) {
                    counts[v][k] = detail::saturating_add(counts[v][k], counts[u][k]);
                }
            }
        }
    }

    out.resolved.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Resolution r;
        if (seeded[i]) {
            r.label = seeds.at(graph.node(i).id);
            r.rule = ResolutionRule::seed;
            r.path_counts = counts[i];
        } else if (dist[i] == kUnvisited) {
            r.label = std::nullopt;
            r.rule = ResolutionRule::unreachable;
        } else {
            r.distance = dist[i];
            r.path_counts = counts[i];
            std::size_t best = 0, competing = 0;
            for (std::size_t k = 0; k < kLabelSlots; ++k) {
                competing += counts[i][k] > 0 ? 1 : 0;
                if (counts[i][k] > counts[i][best]) {
                    best = k;
                }
            }
            std::size_t tied = static_cast<std::size_t>(
                std::count(counts[i].begin(), counts[i].end(), counts[i][best]));
            r.label = slot_label(best);
            r.rule = competing == 1 ? ResolutionRule::shortest_path
                                    : (tied > 1 ? ResolutionRule::tie_break : ResolutionRule::frequency);
        }
        out.resolved[i] = r;
    }
    return out;
}

// Records (or clears, when `label` is empty) a seed and invalidates the
// resolutions of the node and everything below it.
inline Labeling set_seed_label(const WikiGraph &graph, Labeling labeling, NodeId id,
                               std::optional<NodeLabel> label)
{
    auto p = graph.position(id);
    if (!p) {
        throw Error("unknown node " + std::to_string(id));
    }
    if (label) {
        labeling.seeds[id] = *label;
    } else {
        labeling.seeds.erase(id);
    }
    labeling.resolved.resize(graph.size());
    std::vector<bool> seen(graph.size(), false);
    std::deque<std::size_t> queue{*p};
    seen[*p] = true;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        labeling.resolved[u].reset();
        for (auto v : graph.child_positions(u)) {
            if (!seen[v]) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    return labeling;
}

inline Labeling propagate_labels(const WikiGraph &graph, const Labeling &labeling)
{
    return propagate_labels(graph, labeling.seeds);
}

struct CoverageReport {
    std::size_t articles = 0;
    std::size_t labeled_articles = 0;
    std::size_t categories = 0;
    std::size_t labeled_categories = 0;
    // Articles per resolved label, "none" included.
    std::map<std::string, std::size_t> article_counts;
    // Nodes resolved by the frequency rule or the final tie-break.
    std::vector<NodeId> conflicts;

    [[nodiscard]] double percent_articles() const
    {
        return articles == 0 ? 0.0 : 100.0 * static_cast<double>(labeled_articles) / static_cast<double>(articles);
    }
};

inline CoverageReport coverage_report(const WikiGraph &graph, const Labeling &labeling)
{
    CoverageReport rep;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto &node = graph.node(i);
        const Resolution *r = i < labeling.resolved.size() && labeling.resolved[i] ? &*labeling.resolved[i] : nullptr;
        bool labeled = r != nullptr && r->labeled();
        if (r != nullptr && (r->rule == ResolutionRule::frequency || r->rule == ResolutionRule::tie_break)) {
            rep.conflicts.push_back(node.id);
        }
        if (node.kind == NodeKind::article) {
            ++rep.articles;
            rep.labeled_articles += labeled ? 1 : 0;
            ++rep.article_counts[labeled ? label_name(r->label) : "none"];
        } else {
            ++rep.categories;
            rep.labeled_categories += labeled ? 1 : 0;
        }
    }
    return rep;
}

// Seed files: one `node-id TAB label` per line, label is a main category or
// `none`.
inline std::map<NodeId, NodeLabel> read_seeds(std::istream &in)
{
    std::map<NodeId, NodeLabel> seeds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        auto cols = split(t, '\t');
        if (cols.size() != 2) {
            throw FormatError("seed line needs `node-id TAB label`", line_no);
        }
        try {
            seeds[std::stoll(cols[0])] = parse_node_label(trim(cols[1]));
        } catch (const std::logic_error &) {
            throw FormatError("bad node id '" + cols[0] + "'", line_no);
        } catch (const Error &e) {
            throw FormatError(e.what(), line_no);
        }
    }
    return seeds;
}

inline void write_seeds(std::ostream &out, const std::map<NodeId, NodeLabel> &seeds)
{
    for (const auto &[id, label] : seeds) {
        out << id << '\t' << label_name(label) << '\n';
    }
}

} // namespace wikiner

#endif
