#include "splatgen/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "splatgen/errors.hpp"
#include "splatgen/random.hpp"

namespace splatgen {

RigidBody RigidBody::from_mesh(std::shared_ptr<const TriMesh> mesh, const RigidPose& pose,
                               double mass) {
    if (!(mass > 0.0)) {
        throw ArgumentError("body mass must be positive");
    }
    RigidBody b;
    b.mesh_centroid = mesh->centroid();
    double r = 0.0;
    for (const Vec3& v : mesh->vertices) {
        r = std::max(r, (v - b.mesh_centroid).norm());
    }
    b.collision_radius = std::max(r, 1e-6);
    b.instance_id = mesh->instance_id;
    b.class_id = mesh->class_id;
    b.mesh = std::move(mesh);
    b.pose = pose;
    b.mass = mass;
    return b;
}

RigidPose RigidBody::mesh_pose() const {
    return {pose.position - pose.rotation * mesh_centroid, pose.rotation};
}

double RigidBody::inverse_inertia() const {
    return 1.0 / (0.4 * mass * collision_radius * collision_radius);
}

double RigidBody::kinetic_energy() const {
    const double inertia = 0.4 * mass * collision_radius * collision_radius;
    return 0.5 * mass * linear_velocity.squaredNorm() +
           0.5 * inertia * angular_velocity.squaredNorm();
}

PosedMesh RigidBody::posed() const {
    PosedMesh p;
    p.mesh = mesh;
    p.pose = mesh_pose();
    p.instance = instance_id;
    p.class_id = class_id;
    return p;
}

double WorldState::kinetic_energy() const {
    double e = 0.0;
    for (const RigidBody& b : bodies) {
        e += b.kinetic_energy();
    }
    return e;
}

std::vector<StaticCollider> build_enclosure(const Vec3& lo, const Vec3& hi) {
    if (!(lo.array() < hi.array()).all()) {
        throw ArgumentError("workspace bounds must satisfy min < max on every axis");
    }
    std::vector<StaticCollider> out;
    StaticCollider table;
    table.point = lo;
    table.normal = Vec3::UnitZ();
    table.visible_in_shadow_pass = true;
    table.supports_vertices = true;
    out.push_back(table);
    auto wall = [&](const Vec3& point, const Vec3& normal) {
        StaticCollider c;
        c.point = point;
        c.normal = normal;
        out.push_back(c);
    };
    wall(lo, Vec3::UnitX());
    wall(hi, -Vec3::UnitX());
    wall(lo, Vec3::UnitY());
    wall(hi, -Vec3::UnitY());
    return out;
}

namespace {

Quat random_rotation(Rng& rng) {
    // Shoemake's uniform sampling of unit quaternions
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2;
    const double t3 = 2.0 * std::numbers::pi * u3;
    return Quat(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3))
        .normalized();
}

} // namespace

WorldState spawn_objects(std::span<const SpawnAsset> assets, CountRange count, const Vec3& lo,
                         const Vec3& hi, std::uint64_t seed, const PhysicsParams& params) {
    if (assets.empty()) {
        throw ArgumentError("spawn_objects needs at least one asset");
    }
    if (count.min < 0 || count.max < count.min) {
        throw ArgumentError("invalid object count range");
    }
    WorldState world;
    world.colliders = build_enclosure(lo, hi);
    world.params = params;
    Rng rng(seed);
    const auto n = static_cast<int>(rng.integer(count.min, count.max));
    for (int i = 0; i < n; ++i) {
        const SpawnAsset& asset =
            assets[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(assets.size()) - 1))];
        RigidBody body = RigidBody::from_mesh(asset.mesh, {}, asset.mass);
        body.asset = static_cast<std::size_t>(&asset - assets.data());
        body.instance_id = static_cast<std::uint32_t>(i + 1);
        body.class_id = asset.class_id;
        const double r = body.collision_radius;
        if (hi.x() - lo.x() < 2.0 * r || hi.y() - lo.y() < 2.0 * r) {
            throw PlacementError("workspace is narrower than an object's bounding sphere");
        }
        // Height layers: body i is dropped from the i-th slice of the free height range.
        const double z_lo = lo.z() + r + 0.01;
        const double z_hi = std::max(z_lo, hi.z() - r);
        const double layer = (z_hi - z_lo) / n;
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const Vec3 p(rng.uniform(lo.x() + r, hi.x() - r), rng.uniform(lo.y() + r, hi.y() - r),
                         z_lo + layer * (i + rng.uniform()));
            placed = true;
            for (const RigidBody& other : world.bodies) {
                if ((other.pose.position - p).norm() < other.collision_radius + r) {
                    placed = false;
                    break;
                }
            }
            if (placed) {
                body.pose.position = p;
            }
        }
        if (!placed) {
            throw PlacementError("could not place object " + std::to_string(i + 1) +
                                 " without overlap after 1000 attempts");
        }
        body.pose.rotation = random_rotation(rng);
        world.bodies.push_back(std::move(body));
    }
    return world;
}

namespace {

struct Contact {
    std::size_t a = 0;          // body index
    std::ptrdiff_t b = -1;      // second body, -1 for static
    Vec3 normal;                // from a toward b (or out of the static surface into a, negated)
    Vec3 ra;                    // contact point relative to a's centroid
    Vec3 rb;
    double depth = 0.0;         // > 0 penetrating, < 0 separated (speculative)
    double target = 0.0;        // desired normal separation velocity
    double normal_impulse = 0.0;
    Vec3 friction_impulse = Vec3::Zero();
};

// Static contacts store the normal pointing from the surface into the body, and the body
// is treated as "b" in the relative velocity sense: v_rel = v_body at contact.
Vec3 point_velocity(const RigidBody& b, const Vec3& r) {
    return b.linear_velocity + b.angular_velocity.cross(r);
}

void apply_impulse(RigidBody& b, const Vec3& r, const Vec3& impulse) {
    b.linear_velocity += impulse / b.mass;
    b.angular_velocity += b.inverse_inertia() * r.cross(impulse);
}

double effective_mass_inv(const RigidBody& b, const Vec3& r, const Vec3& dir) {
    const Vec3 rn = r.cross(dir);
    return 1.0 / b.mass + b.inverse_inertia() * rn.squaredNorm();
}

constexpr double kContactMargin = 2e-3;

void gather_contacts(const WorldState& w, std::vector<Contact>& contacts) {
    for (std::size_t i = 0; i < w.bodies.size(); ++i) {
        const RigidBody& body = w.bodies[i];
        for (const StaticCollider& c : w.colliders) {
            if (c.kind == ColliderKind::plane && c.supports_vertices) {
                for (const Vec3& v : body.mesh->vertices) {
                    const Vec3 r = body.pose.rotation * (v - body.mesh_centroid);
                    const Vec3 p = body.pose.position + r;
                    const double d = c.signed_distance(p);
                    if (d < kContactMargin) {
                        Contact k;
                        k.a = i;
                        k.normal = c.normal;
                        k.ra = r;
                        k.depth = -d;
                        contacts.push_back(k);
                    }
                }
            } else if (c.kind == ColliderKind::plane) {
                const double d = c.signed_distance(body.pose.position) - body.collision_radius;
                if (d < kContactMargin) {
                    Contact k;
                    k.a = i;
                    k.normal = c.normal;
                    k.ra = -c.normal * body.collision_radius;
                    k.depth = -d;
                    contacts.push_back(k);
                }
            } else {
                const Vec3 closest = body.pose.position.cwiseMax(c.box_min).cwiseMin(c.box_max);
                Vec3 delta = body.pose.position - closest;
                const double dist = delta.norm();
                if (dist > 0.0 && dist - body.collision_radius < kContactMargin) {
                    Contact k;
                    k.a = i;
                    k.normal = delta / dist;
                    k.ra = -k.normal * body.collision_radius;
                    k.depth = body.collision_radius - dist;
                    contacts.push_back(k);
                }
            }
        }
        for (std::size_t j = i + 1; j < w.bodies.size(); ++j) {
            const RigidBody& other = w.bodies[j];
            const Vec3 delta = other.pose.position - body.pose.position;
            const double dist = delta.norm();
            const double gap = dist - body.collision_radius - other.collision_radius;
            if (gap < kContactMargin && dist > 0.0) {
                Contact k;
                k.a = i;
                k.b = static_cast<std::ptrdiff_t>(j);
                k.normal = delta / dist;  // a -> b
                k.ra = k.normal * body.collision_radius;
                k.rb = -k.normal * other.collision_radius;
                k.depth = -gap;
                contacts.push_back(k);
            }
        }
    }
}

// Relative normal velocity: positive when separating.
double separating_velocity(const WorldState& w, const Contact& k) {
    const RigidBody& a = w.bodies[k.a];
    if (k.b < 0) {
        return point_velocity(a, k.ra).dot(k.normal);
    }
    const RigidBody& b = w.bodies[static_cast<std::size_t>(k.b)];
    return (point_velocity(b, k.rb) - point_velocity(a, k.ra)).dot(k.normal);
}

Vec3 relative_velocity(const WorldState& w, const Contact& k) {
    const RigidBody& a = w.bodies[k.a];
    if (k.b < 0) {
        return point_velocity(a, k.ra);
    }
    const RigidBody& b = w.bodies[static_cast<std::size_t>(k.b)];
    return point_velocity(b, k.rb) - point_velocity(a, k.ra);
}

// Applies `impulse` along the contact frame: for static contacts it pushes body a along
// +impulse; for pairs it pushes b along +impulse and a along -impulse.
void apply_contact_impulse(WorldState& w, const Contact& k, const Vec3& impulse) {
    if (k.b < 0) {
        apply_impulse(w.bodies[k.a], k.ra, impulse);
        return;
    }
    apply_impulse(w.bodies[k.a], k.ra, -impulse);
    apply_impulse(w.bodies[static_cast<std::size_t>(k.b)], k.rb, impulse);
}

double contact_mass_inv(const WorldState& w, const Contact& k, const Vec3& dir) {
    double m = effective_mass_inv(w.bodies[k.a], k.ra, dir);
    if (k.b >= 0) {
        m += effective_mass_inv(w.bodies[static_cast<std::size_t>(k.b)], k.rb, dir);
    }
    return m;
}

void solve_contacts(WorldState& w, std::vector<Contact>& contacts, double dt) {
    const PhysicsParams& prm = w.params;
    for (Contact& k : contacts) {
        const double vn = separating_velocity(w, k);
        if (k.depth < 0.0) {
            // speculative: allow closing the gap within this step
            k.target = k.depth / dt;
        } else if (vn < -prm.bounce_threshold) {
            k.target = -prm.restitution * vn;
        } else {
            k.target = 0.0;
        }
    }
    for (int it = 0; it < prm.solver_iterations; ++it) {
        for (Contact& k : contacts) {
            const double vn = separating_velocity(w, k);
            const double kn = contact_mass_inv(w, k, k.normal);
            double lambda = (k.target - vn) / kn;
            const double accumulated = std::max(0.0, k.normal_impulse + lambda);
            lambda = accumulated - k.normal_impulse;
            k.normal_impulse = accumulated;
            if (lambda != 0.0) {
                apply_contact_impulse(w, k, lambda * k.normal);
            }

            const Vec3 vrel = relative_velocity(w, k);
            Vec3 vt = vrel - vrel.dot(k.normal) * k.normal;
            const double vt_len = vt.norm();
            if (vt_len > 1e-12) {
                const Vec3 t = vt / vt_len;
                const double kt = contact_mass_inv(w, k, t);
                Vec3 desired = k.friction_impulse - (vt_len / kt) * t;
                const double limit = prm.friction * k.normal_impulse;
                if (desired.norm() > limit) {
                    desired *= limit / desired.norm();
                }
                const Vec3 delta = desired - k.friction_impulse;
                k.friction_impulse = desired;
                apply_contact_impulse(w, k, delta);
            }
        }
    }
}

void integrate(WorldState& w, double dt) {
    const double lin = std::exp(-w.params.linear_damping * dt);
    const double ang = std::exp(-w.params.angular_damping * dt);
    for (RigidBody& b : w.bodies) {
        b.linear_velocity *= lin;
        b.angular_velocity *= ang;
        b.pose.position += b.linear_velocity * dt;
        const Vec3& om = b.angular_velocity;
        const double angle = om.norm() * dt;
        if (angle > 0.0) {
            const Quat dq(Eigen::AngleAxisd(angle, om.normalized()));
            b.pose.rotation = (dq * b.pose.rotation).normalized();
        }
    }
}

void correct_positions(WorldState& w) {
    const double slop = w.params.slop;
    for (int pass = 0; pass < 4; ++pass) {
        for (RigidBody& b : w.bodies) {
            for (const StaticCollider& c : w.colliders) {
                double pen = 0.0;
                if (c.kind == ColliderKind::plane && c.supports_vertices) {
                    for (const Vec3& v : b.mesh->vertices) {
                        const Vec3 p = b.pose.position + b.pose.rotation * (v - b.mesh_centroid);
                        pen = std::max(pen, -c.signed_distance(p));
                    }
                    if (pen > slop) {
                        b.pose.position += (pen - slop) * c.normal;
                    }
                } else if (c.kind == ColliderKind::plane) {
                    pen = b.collision_radius - c.signed_distance(b.pose.position);
                    if (pen > slop) {
                        b.pose.position += (pen - slop) * c.normal;
                    }
                } else {
                    const Vec3 closest = b.pose.position.cwiseMax(c.box_min).cwiseMin(c.box_max);
                    const Vec3 delta = b.pose.position - closest;
                    const double dist = delta.norm();
                    pen = b.collision_radius - dist;
                    if (dist > 0.0 && pen > slop) {
                        b.pose.position += (pen - slop) * delta / dist;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < w.bodies.size(); ++i) {
            for (std::size_t j = i + 1; j < w.bodies.size(); ++j) {
                RigidBody& a = w.bodies[i];
                RigidBody& b = w.bodies[j];
                const Vec3 delta = b.pose.position - a.pose.position;
                const double dist = delta.norm();
                const double pen = a.collision_radius + b.collision_radius - dist;
                if (dist > 0.0 && pen > slop) {
                    const Vec3 n = delta / dist;
                    const double wa = 1.0 / a.mass;
                    const double wb = 1.0 / b.mass;
                    const double move = (pen - slop) / (wa + wb);
                    a.pose.position -= move * wa * n;
                    b.pose.position += move * wb * n;
                }
            }
        }
    }
}

} // namespace

void step_in_place(WorldState& world, double dt) {
    if (!(dt > 0.0)) {
        throw ArgumentError("time step must be positive");
    }
    for (RigidBody& b : world.bodies) {
        b.linear_velocity += world.params.gravity * dt;
    }
    std::vector<Contact> contacts;
    gather_contacts(world, contacts);
    solve_contacts(world, contacts, dt);
    integrate(world, dt);
    correct_positions(world);
    world.time += dt;
}

WorldState step(const WorldState& world, double dt) {
    WorldState next = world;
    step_in_place(next, dt);
    return next;
}

SettleResult settle(WorldState world, int max_steps, double ke_threshold) {
    if (max_steps < 1) {
        throw ArgumentError("settle needs max_steps >= 1");
    }
    SettleResult result;
    int quiet = 0;
    int steps = 0;
    while (steps < max_steps) {
        step_in_place(world, world.params.dt);
        ++steps;
        quiet = world.kinetic_energy() < ke_threshold ? quiet + 1 : 0;
        if (quiet >= kSettleQuietSteps) {
            result.converged = true;
            break;
        }
    }
    result.world = std::move(world);
    result.steps = steps;
    return result;
}

SplatCloud sync_splat_to_mesh(const SplatCloud& asset_splat, const RigidPose& mesh_pose,
                              ShRotation mode) {
    return transform_cloud(asset_splat, SimilarityTransform::from_rigid(mesh_pose), mode);
}

} // namespace splatgen
