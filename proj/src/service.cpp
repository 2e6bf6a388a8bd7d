#include "glyphforge/service.hpp"

#include <charconv>

#include <httplib.h>

#include "glyphforge/error.hpp"
#include "glyphforge/json_codec.hpp"
#include "glyphforge/recognition.hpp"
#include "glyphforge/store.hpp"

namespace glyphforge {

using nlohmann::json;

namespace {

const json& require_field(const json& request, const char* name) {
    if (!request.is_object()) throw ApiError(400, "request body must be a JSON object");
    auto it = request.find(name);
    if (it == request.end()) throw ApiError(400, std::string("missing field '") + name + "'");
    return *it;
}

BinaryGrid rows_to_grid(const json& request, GridDims dims) {
    const json& rows = require_field(request, "rows");
    if (!rows.is_array()) throw ApiError(400, "'rows' must be an array of strings");
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& row : rows) {
        if (!row.is_string()) throw ApiError(400, "'rows' must be an array of strings");
        lines.push_back(row.get<std::string>());
    }
    if (lines.size() != dims.height) {
        throw ApiError(400, "expected " + std::to_string(dims.height) + " rows, got " + std::to_string(lines.size()));
    }
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != dims.width) {
            throw ApiError(400, "row " + std::to_string(r + 1) + " has width " + std::to_string(lines[r].size()) +
                                    ", expected " + std::to_string(dims.width));
        }
    }
    try {
        return BinaryGrid::from_rows(lines);
    } catch (const InvalidArgument& e) {
        throw ApiError(400, e.what());
    }
}

Label path_label(const std::string& text) {
    if (!Label::validate(text).empty()) throw ApiError(404, "unknown label '" + text + "'");
    return Label(text);
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            send_json(res, 200, handler(req));
        } catch (const ApiError& e) {
            send_json(res, e.status(), json{{"error", e.what()}});
        } catch (const json::exception& e) {
            send_json(res, 400, json{{"error", std::string("malformed JSON: ") + e.what()}});
        } catch (const std::exception&) {
            send_json(res, 500, json{{"error", "internal error"}});
        }
    };
}

json parse_body(const httplib::Request& req) {
    return json::parse(req.body);
}

}  // namespace

void FifoMutex::lock() {
    std::unique_lock lock(mutex_);
    const std::uint64_t ticket = next_ticket_++;
    turn_.wait(lock, [&] { return serving_ == ticket; });
}

void FifoMutex::unlock() {
    {
        std::lock_guard lock(mutex_);
        ++serving_;
    }
    turn_.notify_all();
}

ApiSession::ApiSession(std::filesystem::path kb_path, KnowledgeBase kb)
    : kb_path_(std::move(kb_path)), kb_(std::move(kb)) {}

ApiSession ApiSession::open(const std::filesystem::path& kb_path, std::optional<GridDims> create_dims) {
    if (std::filesystem::exists(kb_path)) {
        KnowledgeBase kb = load_kb(kb_path);
        if (create_dims && *create_dims != kb.dims()) {
            throw DimsMismatch(kb_path.string() + " is " + kb.dims().to_string() + ", --grid asks for " +
                               create_dims->to_string());
        }
        return ApiSession(kb_path, std::move(kb));
    }
    KnowledgeBase kb(create_dims.value_or(kDefaultDims));
    save_kb(kb, kb_path);
    return ApiSession(kb_path, std::move(kb));
}

json ApiSession::meta() const {
    std::shared_lock lock(state_mutex_);
    return json{{"dims", {{"w", kb_.dims().width}, {"h", kb_.dims().height}}},
                {"label_count", kb_.size()},
                {"version", version_}};
}

json ApiSession::labels() const {
    std::shared_lock lock(state_mutex_);
    json out = json::array();
    for (const auto& [label, weights] : kb_.entries()) {
        out.push_back(json{{"label", label.str()}, {"teach_count", weights.teach_count()}});
    }
    return out;
}

json ApiSession::weights(const std::string& label) const {
    const Label key = path_label(label);
    std::shared_lock lock(state_mutex_);
    auto it = kb_.entries().find(key);
    if (it == kb_.entries().end()) throw ApiError(404, "unknown label '" + label + "'");
    return weights_to_json(it->first, it->second);
}

json ApiSession::classify(const json& request) const {
    Quotient threshold = kDefaultThreshold;
    if (request.is_object() && request.contains("threshold") && !request["threshold"].is_null()) {
        try {
            threshold = threshold_from_json(request["threshold"]);
        } catch (const Error& e) {
            throw ApiError(400, std::string("invalid threshold: ") + e.what());
        }
    }
    std::shared_lock lock(state_mutex_);
    const BinaryGrid input = rows_to_grid(request, kb_.dims());
    return decision_to_json(glyphforge::classify(kb_, input, threshold));
}

json ApiSession::teach(const json& request) {
    const json& label_field = require_field(request, "label");
    if (!label_field.is_string()) throw ApiError(400, "'label' must be a string");
    const std::string name = label_field.get<std::string>();
    if (auto reason = Label::validate(name); !reason.empty()) throw ApiError(422, reason);
    const Label label(name);

    std::lock_guard writer(writer_mutex_);
    // Only writers touch kb_, and we are the only writer now.
    const BinaryGrid pattern = rows_to_grid(request, kb_.dims());
    KnowledgeBase next = kb_;
    std::int64_t teach_count = 0;
    try {
        teach_count = next.teach(label, pattern);
    } catch (const TeachLimit& e) {
        throw ApiError(422, e.what());
    }
    save_kb(next, kb_path_);

    std::unique_lock lock(state_mutex_);
    kb_ = std::move(next);
    ++version_;
    return json{{"label", name}, {"teach_count", teach_count}, {"version", version_}};
}

json ApiSession::forget(const std::string& label) {
    const Label key = path_label(label);
    std::lock_guard writer(writer_mutex_);
    if (!kb_.contains(key)) throw ApiError(404, "unknown label '" + label + "'");
    KnowledgeBase next = kb_;
    next.forget(key);
    save_kb(next, kb_path_);

    std::unique_lock lock(state_mutex_);
    kb_ = std::move(next);
    ++version_;
    return json{{"version", version_}};
}

std::uint64_t ApiSession::version() const {
    std::shared_lock lock(state_mutex_);
    return version_;
}

KnowledgeBase ApiSession::snapshot() const {
    std::shared_lock lock(state_mutex_);
    return kb_;
}

void mount_routes(httplib::Server& server, ApiSession& session, const std::optional<std::filesystem::path>& static_dir) {
    server.Get("/api/meta", guarded([&](const httplib::Request&) { return session.meta(); }));
    server.Get("/api/labels", guarded([&](const httplib::Request&) { return session.labels(); }));
    server.Get(R"(/api/weights/(.+))",
               guarded([&](const httplib::Request& req) { return session.weights(req.matches[1].str()); }));
    server.Delete(R"(/api/labels/(.+))",
                  guarded([&](const httplib::Request& req) { return session.forget(req.matches[1].str()); }));
    server.Post("/api/teach", guarded([&](const httplib::Request& req) { return session.teach(parse_body(req)); }));
    server.Post("/api/classify",
                guarded([&](const httplib::Request& req) { return session.classify(parse_body(req)); }));
    if (static_dir) {
        if (!server.set_mount_point("/", static_dir->string())) {
            throw IoError("static asset directory " + static_dir->string() + " does not exist");
        }
    }
}

std::pair<std::string, int> parse_bind_address(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("bind address must be host:port, got '" + text + "'");
    std::string host = text.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    const std::string port_text = text.substr(colon + 1);
    int port = -1;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (port_text.empty() || ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 ||
        port > 65535) {
        throw InvalidArgument("invalid port in bind address '" + text + "'");
    }
    return {host, port};
}

}  // namespace glyphforge
