#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rack/corpus_search.hpp"
#include "rack/error.hpp"
#include "rack/ingest.hpp"
#include "rack/index_store.hpp"
#include "rack/reformulator.hpp"
#include "rack/render.hpp"
#include "rack/snippet_extract.hpp"
#include "rack/text.hpp"

namespace py = pybind11;
using namespace rack;

namespace {

// nlohmann -> Python via the json module; the outputs are small
py::object to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

Stoplist stoplist_or_default(const std::optional<std::string>& path)
{
    return path ? Stoplist::from_file(*path) : Stoplist::default_list();
}

DumpFormat format_of(const std::string& name)
{
    auto f = parse_dump_format(name);
    if (!f)
        throw Error(ErrorCode::InvalidArgument, "unknown dump format: " + name);
    return *f;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "keyword-API index, query reformulation and snippet search";

    static py::exception<Error> rack_error(m, "RackError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(rack_error)(e.what());
            err.attr("code") = std::string(code_name(e.code()));
            PyErr_SetObject(rack_error.ptr(), err.ptr());
        }
    });

    m.def("porter_stem", [](const std::string& w) { return porter_stem(w); });
    m.def("split_words", [](const std::string& t) { return split_words(t); });
    m.def(
        "extract_keywords",
        [](const std::string& text, std::optional<std::string> stoplist) {
            return extract_keywords(text, stoplist_or_default(stoplist));
        },
        py::arg("text"), py::arg("stoplist") = py::none());
    m.def("extract_api_classes", [](const std::string& body) { return extract_api_classes(body); });
    m.def("extract_comment_query", [](const std::string& src, std::size_t line) {
        return extract_comment_query(src, line);
    });

    py::class_<KeywordApiIndex>(m, "Index")
        .def_static("load", &load_index, py::arg("path"))
        .def_static("from_bytes", [](const py::bytes& b) { return deserialize_index(std::string(b)); })
        .def_static(
            "from_dump",
            [](const std::string& path, const std::string& format, std::optional<std::string> stoplist,
               unsigned threads) {
                DumpParseResult parsed;
                {
                    py::gil_scoped_release release;
                    parsed = parse_dump_file(path, format_of(format));
                }
                auto sl = stoplist_or_default(stoplist);
                py::gil_scoped_release release;
                return KeywordApiIndex(build_associations(parsed.pairs, sl, threads),
                                       IndexMeta{sha256_file_hex(path), "", 0});
            },
            py::arg("path"), py::arg("format") = "xml", py::arg("stoplist") = py::none(), py::arg("threads") = 0)
        .def("save", [](const KeywordApiIndex& i, const std::string& path) { save_index(i, path); })
        .def("to_bytes", [](const KeywordApiIndex& i) { return py::bytes(serialize_index(i)); })
        .def_property_readonly("record_count", &KeywordApiIndex::record_count)
        .def_property_readonly("source_digest", [](const KeywordApiIndex& i) { return i.meta().source_digest; })
        .def("lookup", [](const KeywordApiIndex& i, const std::string& kw) { return i.lookup(kw); })
        .def("entries", &KeywordApiIndex::entries)
        .def("__eq__", [](const KeywordApiIndex& a, const KeywordApiIndex& b) { return a == b; })
        .def("__len__", &KeywordApiIndex::record_count);

    m.def(
        "suggest",
        [](const KeywordApiIndex& index, const std::string& query, std::size_t top, std::size_t window,
           std::optional<std::string> stoplist) {
            auto sl = stoplist_or_default(stoplist);
            return to_py(suggestion_json(suggest(index, query, sl, {top, window})));
        },
        py::arg("index"), py::arg("query"), py::arg("top") = kDefaultSuggestions,
        py::arg("window") = kDefaultCoherenceWindow, py::arg("stoplist") = py::none());

    m.def("extract_methods", [](const std::string& src) {
        auto r = extract_methods(src);
        py::list methods;
        for (const auto& s : r.methods)
            methods.append(py::dict(py::arg("name") = s.name, py::arg("start_line") = s.start_line,
                                    py::arg("end_line") = s.end_line, py::arg("body") = s.body));
        return py::make_tuple(methods, r.partial);
    });

    py::class_<LocalCorpusIndex>(m, "LocalCorpus")
        .def(py::init([](const std::filesystem::path& dir) { return LocalCorpusIndex::build(dir); }))
        .def_property_readonly("file_count", &LocalCorpusIndex::file_count)
        .def(
            "search",
            [](const LocalCorpusIndex& c, const std::string& query, const std::vector<std::string>& apis,
               std::size_t k, std::size_t files, double host_weight, std::optional<std::string> stoplist) {
                auto sl = stoplist_or_default(stoplist);
                auto hits = c.search(apis, files);
                return to_py(rank_result_json(rank_snippets(hits, Query::parse(query, sl), apis, {k, host_weight})));
            },
            py::arg("query"), py::arg("apis"), py::arg("k") = 10, py::arg("files") = 10,
            py::arg("host_weight") = 0.5, py::arg("stoplist") = py::none());
}
