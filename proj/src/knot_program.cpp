#include "knot_actions.hpp"

#include "knotfield/error.hpp"
#include "knotfield/sweep.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace knotfield {

std::string ProgramStep::label() const {
    return variant == 0 ? std::to_string(number) : std::to_string(number) + "." + std::to_string(variant);
}

namespace {

std::vector<ProgramStep> steps_of(std::initializer_list<int> numbers) {
    std::vector<ProgramStep> out;
    for (int n : numbers) out.push_back({n, 0});
    return out;
}

void validate_program(const KnotProgram& p) {
    if (p.steps.empty() || p.steps.front() != ProgramStep{1, 0}) {
        throw Error(ErrorKind::Structural, "program must start with step 1");
    }
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        const auto& s = p.steps[i];
        if (s.number < 1 || s.number > 10) throw Error(ErrorKind::Structural, "step " + s.label() + " out of range");
        if (s.variant != 0 && (s.number != 6 || s.variant > 2 || s.variant < 0)) {
            throw Error(ErrorKind::Structural, "step " + s.label() + " has no such variant");
        }
        if (i > 0 && s.number == 1) throw Error(ErrorKind::Structural, "step 1 may only appear first");
    }
}

} // namespace

const std::vector<std::string>& builtin_program_names() {
    static const std::vector<std::string> names{"unknot", "3_1", "4_1", "5_2", "7_3"};
    return names;
}

KnotProgram builtin_program(const std::string& name) {
    static const std::map<std::string, std::vector<ProgramStep>> table{
        {"unknot", steps_of({1, 2, 3, 4, 5})},
        {"3_1", steps_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})},
        {"4_1", steps_of({1, 2, 3, 4, 5, 6, 6, 7, 8, 9, 10})},
        {"5_2", steps_of({1, 2, 3, 4, 5, 6, 6, 6, 7, 8, 9, 10})},
        {"7_3", steps_of({1, 2, 3, 4, 5, 6, 6, 6, 7, 8, 9, 7, 8, 9, 10})},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw Error(ErrorKind::InvalidParameter, "unknown knot program '" + name + "'");
    return {name, it->second};
}

KnotProgram read_program(std::istream& in) {
    KnotProgram p{"custom", {}};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        std::string value;
        std::string extra;
        if (!(ls >> value) || (ls >> extra)) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected '<keyword> <value>'");
        }
        if (word == "name") {
            p.name = value;
        } else if (word == "step") {
            ProgramStep s{0, 0};
            const auto dot = value.find('.');
            try {
                std::size_t used = 0;
                s.number = std::stoi(value.substr(0, dot), &used);
                if (used != value.substr(0, dot).size()) throw std::invalid_argument("trailing");
                if (dot != std::string::npos) {
                    const std::string v = value.substr(dot + 1);
                    s.variant = std::stoi(v, &used);
                    if (used != v.size()) throw std::invalid_argument("trailing");
                }
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad step '" + value + "'");
            }
            p.steps.push_back(s);
        } else {
            throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": unknown keyword '" + word + "'");
        }
    }
    validate_program(p);
    return p;
}

KnotProgram read_program_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open program file '" + path + "'");
    return read_program(in);
}

namespace {

using actions::RopeEnd;

NodePtr step_node(actions::Context& ctx, const ProgramStep& s) {
    const std::string label = s.label();
    switch (s.number) {
    case 2: return actions::grasp(ctx, label, RopeEnd::End, 1);
    case 3: return actions::insertion(ctx, label, RopeEnd::End, true);
    case 4: return actions::hand_over(ctx, label, RopeEnd::End);
    case 5: return actions::grasp(ctx, label, RopeEnd::Start, -1);
    case 6:
        if (s.variant == 1) return actions::turn_base(ctx, label);
        if (s.variant == 2) return actions::twist(ctx, label);
        {
            std::vector<NodePtr> alts;
            alts.push_back(actions::turn_base(ctx, "6.1"));
            alts.push_back(actions::twist(ctx, "6.2"));
            return std::make_unique<SelectorStar>(label, std::move(alts));
        }
    case 7: return actions::insertion(ctx, label, RopeEnd::Start, false);
    case 8: return actions::release(ctx, label, RopeEnd::End);
    case 9: return actions::hand_over(ctx, label, RopeEnd::Start);
    case 10: return actions::grasp(ctx, label, RopeEnd::End, -1);
    default: break;
    }
    throw Error(ErrorKind::Structural, "step " + label + " cannot be placed here");
}

NodePtr build(const KnotProgram& program, actions::Context& ctx) {
    validate_program(program);
    std::vector<NodePtr> body;
    const auto& steps = program.steps;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        // Step 3 re-checks the grasp of step 2 every tick, so a dropped rope
        // is grasped again before the insertion continues.
        if (steps[i].number == 2 && i + 1 < steps.size() && steps[i + 1].number == 3) {
            std::vector<NodePtr> pair;
            pair.push_back(step_node(ctx, steps[i]));
            pair.push_back(step_node(ctx, steps[i + 1]));
            body.push_back(std::make_unique<Sequence>("2-3", std::move(pair)));
            ++i;
            continue;
        }
        body.push_back(step_node(ctx, steps[i]));
    }
    std::vector<NodePtr> root;
    root.push_back(actions::approach_loop(ctx));
    if (!body.empty()) root.push_back(std::make_unique<SequenceStar>("steps", std::move(body)));
    return std::make_unique<Sequence>("root", std::move(root));
}

} // namespace

NodePtr build_tree(const KnotProgram& program, KnotWorld& world, KnotResult& result) {
    // The context must outlive the tree; the tree owns it through a holder leaf.
    auto ctx = std::make_shared<actions::Context>(actions::Context{world, result, {}, nullptr});
    NodePtr tree = build(program, *ctx);
    struct Holder : Node {
        Holder(NodePtr t, std::shared_ptr<actions::Context> c) : Node(t->name()), tree(std::move(t)), ctx(std::move(c)) {}
        Status tick() override { return tree->tick(); }
        void reset() override { tree->reset(); }
        NodePtr tree;
        std::shared_ptr<actions::Context> ctx;
    };
    return std::make_unique<Holder>(std::move(tree), std::move(ctx));
}

KnotResult run_program(const KnotProgram& program, const KnotConfig& config, const LoopProvider& anchor,
                       std::uint64_t seed) {
    KnotResult result;
    KnotWorld world(config, anchor, seed);
    actions::Context ctx{world, result, {}, nullptr};
    NodePtr root = build(program, ctx);

    Status status = Status::Running;
    for (int t = 0; t < config.max_ticks && status == Status::Running; ++t) {
        world.begin_tick();
        try {
            status = root->tick();
            world.end_tick();
        } catch (const Error& e) {
            result.error = e.what();
            status = Status::Failure;
        }
        const BasePose& b = world.base();
        result.log.push_back({world.tick(), ctx.active, status, b, world.arm(0).position, world.arm(1).position});
        result.ticks = world.tick() + 1;
    }
    result.completed = status == Status::Success;
    if (status == Status::Running) result.error = "tick budget exhausted";
    if (status == Status::Failure && result.error.empty()) {
        result.error = "step " + ctx.active + " failed";
    }
    result.final_rope = world.rope();
    try {
        result.link_check = link_check(world.rope(), world.anchor());
    } catch (const Error&) {
        result.link_check.reset();
    }
    return result;
}

void write_tick_log_csv(std::ostream& out, const std::vector<TickRecord>& log) {
    out << "tick,active_step,status,base_x,base_y,heading,arm1_x,arm1_y,arm1_z,arm2_x,arm2_y,arm2_z\n";
    for (const auto& r : log) {
        out << r.tick << ',' << r.active_step << ',' << to_string(r.status) << ',' << format_double(r.base.x) << ','
            << format_double(r.base.y) << ',' << format_double(r.base.heading);
        for (const Vec3* a : {&r.arm1, &r.arm2}) {
            for (int k = 0; k < 3; ++k) out << ',' << format_double((*a)[k]);
        }
        out << '\n';
    }
}

} // namespace knotfield
