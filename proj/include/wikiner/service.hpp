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

#ifndef WIKINER_SERVICE_HPP
#define WIKINER_SERVICE_HPP

#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include <wikiner/pipeline.hpp>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace wikiner
{

inline std::string_view to_string(NodeKind k) { return k == NodeKind::article ? "article" : "category"; }

// JSON HTTP service over one knowledge base and labeling. Reads share a lock;
// seed mutations are applied one at a time by re-propagating outside the
// lock and swapping the result in.
class Service
{
public:
    struct Options {
        std::size_t search_limit = 50;
        std::size_t children_page = 100;
        std::string seeds_path; // rewritten after every mutation when set
        std::string static_dir; // served under / when set
    };

    Service(Resources res, Options opts) : res_(std::move(res)), opts_(std::move(opts))
    {
        if (!res_.snapshot) {
            throw Error("service needs a statistics snapshot");
        }
        if (res_.labeling.resolved.size() != graph().size()) {
            res_.labeling = propagate_labels(graph(), res_.labeling.seeds);
        }
        if (res_.main_model) {
            annotator_.emplace(res_);
        }
        // SO_REUSEADDR without SO_REUSEPORT so a busy port fails to bind.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
        });
        routes();
        if (!opts_.static_dir.empty() && !server_.set_mount_point("/", opts_.static_dir)) {
            throw Error("cannot serve static files from " + opts_.static_dir);
        }
    }

    explicit Service(Resources res) : Service(std::move(res), Options{}) {}

    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    ~Service() { stop(); }

    // Binds the socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string &host, int port)
    {
        if (port == 0) {
            port_ = server_.bind_to_any_port(host);
        } else if (server_.bind_to_port(host, port)) {
            port_ = port;
        } else {
            port_ = -1;
        }
        if (port_ <= 0) {
            throw Error("cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
        }
        return port_;
    }

    // Blocks until stop().
    void run()
    {
        spdlog::info("serving on port {}", port_);
        server_.listen_after_bind();
    }

    void stop()
    {
        if (server_.is_running()) {
            server_.stop();
        }
    }

    bool wait_until_ready() const
    {
        server_.wait_until_ready();
        return server_.is_running();
    }

    [[nodiscard]] int port() const { return port_; }

    // Direct access used by handlers and tests.
    nlohmann::json put_seed(NodeId id, const std::optional<NodeLabel> &label)
    {
        std::lock_guard writer(writer_mutex_);
        std::map<NodeId, NodeLabel> seeds;
        {
            std::shared_lock read(state_mutex_);
            if (!graph().position(id)) {
                throw NotFound("unknown node " + std::to_string(id));
            }
            seeds = res_.labeling.seeds;
        }
        if (label) {
            seeds[id] = *label;
        } else {
            seeds.erase(id);
        }
        Labeling next = propagate_labels(graph(), seeds);
        {
            std::unique_lock write(state_mutex_);
            res_.labeling = std::move(next);
        }
        if (!opts_.seeds_path.empty()) {
            std::ofstream out(opts_.seeds_path);
            write_seeds(out, seeds);
        }
        std::shared_lock read(state_mutex_);
        return coverage_json();
    }

private:
    struct NotFound : Error {
        using Error::Error;
    };

    const WikiGraph &graph() const { return res_.snapshot->kb.graph; }

    nlohmann::json node_summary(NodeId id) const
    {
        const auto *n = graph().find(id);
        return {{"id", n->id}, {"title", n->title}, {"kind", to_string(n->kind)}};
    }

    nlohmann::json label_json(NodeId id) const
    {
        nlohmann::json j{{"id", id}, {"seed", res_.labeling.seeds.count(id) > 0}};
        const auto *r = res_.labeling.resolution(graph(), id);
        if (r == nullptr || r->rule == ResolutionRule::unreachable) {
            j["label"] = nullptr;
            j["rule"] = "unreachable";
            return j;
        }
        j["label"] = label_name(r->label);
        j["rule"] = to_string(r->rule);
        j["distance"] = r->distance;
        nlohmann::json counts = nlohmann::json::object();
        for (std::size_t s = 0; s < kLabelSlots; ++s) {
            if (r->path_counts[s] > 0) {
                counts[label_name(slot_label(s))] = r->path_counts[s];
            }
        }
        j["path_counts"] = counts;
        return j;
    }

    nlohmann::json coverage_json() const
    {
        auto rep = coverage_report(graph(), res_.labeling);
        nlohmann::json conflicts = nlohmann::json::array();
        for (auto id : rep.conflicts) {
            conflicts.push_back(id);
        }
        return {{"articles", rep.articles},
                {"labeled_articles", rep.labeled_articles},
                {"categories", rep.categories},
                {"labeled_categories", rep.labeled_categories},
                {"percent_articles", rep.percent_articles()},
                {"article_counts", rep.article_counts},
                {"conflicts", conflicts}};
    }

    std::vector<Sentence> request_sentences(const nlohmann::json &body) const
    {
        if (auto it = body.find("tokens"); it != body.end()) {
            std::vector<Sentence> out;
            for (const auto &s : *it) {
                out.push_back(make_sentence(s.get<std::vector<std::string>>()));
            }
            return out;
        }
        if (auto it = body.find("text"); it != body.end()) {
            return tokenize_text(it->get<std::string>(), res_.config.tokenizer);
        }
        throw Error("request needs `text` or `tokens`");
    }

    static NodeId path_id(const httplib::Request &req)
    {
        try {
            return std::stoll(req.matches[1].str());
        } catch (const std::logic_error &) {
            throw Error("bad node id");
        }
    }

    template <typename F>
    static httplib::Server::Handler handler(F f)
    {
        return [f](const httplib::Request &req, httplib::Response &res) {
            nlohmann::json out;
            try {
                out = f(req);
                res.status = 200;
            } catch (const NotFound &e) {
                res.status = 404;
                out = {{"error", e.what()}};
            } catch (const nlohmann::json::exception &e) {
                res.status = 400;
                out = {{"error", std::string("bad JSON: ") + e.what()}};
            } catch (const std::exception &e) {
                res.status = 400;
                out = {{"error", e.what()}};
            }
            res.set_content(out.dump(), "application/json");
        };
    }

    void routes()
    {
        server_.Get("/api/nodes", handler([this](const httplib::Request &req) {
                        std::shared_lock lock(state_mutex_);
                        nlohmann::json out = nlohmann::json::array();
                        auto q = req.get_param_value("q");
                        if (q.empty()) {
                            return out;
                        }
                        for (auto id : graph().search(q, opts_.search_limit)) {
                            out.push_back(node_summary(id));
                        }
                        return out;
                    }));
        server_.Get(R"(/api/nodes/(-?\d+))", handler([this](const httplib::Request &req) {
                        std::shared_lock lock(state_mutex_);
                        auto id = path_id(req);
                        auto pos = graph().position(id);
                        if (!pos) {
                            throw NotFound("unknown node " + std::to_string(id));
                        }
                        std::size_t offset = 0;
                        if (req.has_param("offset")) {
                            offset = std::stoul(req.get_param_value("offset"));
                        }
                        auto j = node_summary(id);
                        nlohmann::json parents = nlohmann::json::array(), children = nlohmann::json::array();
                        for (auto p : graph().parent_positions(*pos)) {
                            parents.push_back(node_summary(graph().node(p).id));
                        }
                        const auto &kids = graph().child_positions(*pos);
                        for (std::size_t i = offset; i < kids.size() && i < offset + opts_.children_page; ++i) {
                            children.push_back(node_summary(graph().node(kids[i]).id));
                        }
                        j["parents"] = parents;
                        j["children"] = children;
                        j["children_total"] = kids.size();
                        j["resolution"] = label_json(id);
                        return j;
                    }));
        server_.Get(R"(/api/labels/(-?\d+))", handler([this](const httplib::Request &req) {
                        std::shared_lock lock(state_mutex_);
                        auto id = path_id(req);
                        if (!graph().position(id)) {
                            throw NotFound("unknown node " + std::to_string(id));
                        }
                        return label_json(id);
                    }));
        server_.Put(R"(/api/seeds/(-?\d+))", handler([this](const httplib::Request &req) {
                        auto body = nlohmann::json::parse(req.body);
                        return put_seed(path_id(req), parse_node_label(body.at("label").get<std::string>()));
                    }));
        server_.Delete(R"(/api/seeds/(-?\d+))", handler([this](const httplib::Request &req) {
                           return put_seed(path_id(req), std::nullopt);
                       }));
        server_.Get("/api/seeds", handler([this](const httplib::Request &) {
                        std::shared_lock lock(state_mutex_);
                        nlohmann::json out = nlohmann::json::object();
                        for (const auto &[id, label] : res_.labeling.seeds) {
                            out[std::to_string(id)] = label_name(label);
                        }
                        return out;
                    }));
        server_.Get("/api/coverage", handler([this](const httplib::Request &) {
                        std::shared_lock lock(state_mutex_);
                        return coverage_json();
                    }));
        server_.Post("/api/annotate", handler([this](const httplib::Request &req) {
                         if (!annotator_) {
                             throw Error("no tagger checkpoint loaded");
                         }
                         auto body = nlohmann::json::parse(req.body);
                         Document doc{body.value("id", std::string("doc0")), request_sentences(body)};
                         std::shared_lock lock(state_mutex_);
                         return document_to_json(annotator_->annotate(std::move(doc)));
                     }));
        server_.Post("/api/link", handler([this](const httplib::Request &req) {
                         auto body = nlohmann::json::parse(req.body);
                         auto sentences = request_sentences(body);
                         std::shared_lock lock(state_mutex_);
                         FeatureExtractor fx(res_);
                         nlohmann::json out = nlohmann::json::array();
                         for (const auto &s : sentences) {
                             nlohmann::json toks = nlohmann::json::array(), mentions = nlohmann::json::array();
                             for (const auto &t : s.tokens) {
                                 toks.push_back(t.surface);
                             }
                             for (const auto &m : fx.link(s.tokens)) {
                                 mentions.push_back({{"start", m.start},
                                                     {"end", m.end},
                                                     {"label", m.label},
                                                     {"concept", m.concept_id},
                                                     {"title", graph().find(m.concept_id)->title},
                                                     {"category", to_string(m.category)},
                                                     {"score", m.score}});
                             }
                             out.push_back({{"tokens", toks}, {"mentions", mentions}});
                         }
                         return out;
                     }));
    }

    Resources res_;
    Options opts_;
    std::optional<Annotator> annotator_;
    httplib::Server server_;
    int port_ = -1;
    mutable std::shared_mutex state_mutex_;
    std::mutex writer_mutex_;
};

} // namespace wikiner

#endif
