#![allow(dead_code)]

use aero_orch::model::{Instance, UeSpec};

const PHYS: &str = r#"
[channels.phys]
transmit_power = 0.2
noise_density = 3.98e-21
subcarrier_spacing = 15000.0
path_loss_exponent = 4.8
reference_distance = 1.0
quality_threshold = 1.0
rayleigh_scale = 0.5
intra_area_distance = 1000.0
"#;

/// UAV in area 0 over the UE, RSU in area 1, one link between them.
pub fn hand_instance() -> Instance {
    let text = format!(
        r#"
[time]
total_frames = 1
slots_per_frame = 1

[grid]
rows = 1
cols = 2
los_probability = [0.5, 0.5]

[[nodes]]
id = 0
kind = "rsu"
processing_capacity = 50.0
deploy_energy = 12.0
fixed_area = 1

[[nodes]]
id = 1
kind = "uav"
processing_capacity = 50.0
deploy_energy = 30.0
start_area = 0

[nodes.uav_params]
weight = 5.0
induced_power = 0.08
air_density = 1.225
rotor_disk_area = 0.6
drag_coeff = 0.05
frontal_area = 0.25
velocity_profile = 10.0

[[links]]
id = 0
endpoints = [0, 1]
bandwidth_capacity = 20.0
transmit_energy = 5.0
base_latency = 10.0

[[services]]
id = 0
functions = [0]
duration_frames = 1

[[channels]]
id = 0
use_energy = 3.0
{PHYS}
[[ues]]
ue = 0
area = 0
heading = "E"

[[requests]]
id = 0
ue = 0
service = 0
entry_frame = 0
active_window = [0, 1]
bandwidth_req = 4.0
capacity_req = [10.0]
latency_req = 100.0
required_slots = 1
"#
    );
    Instance::from_toml_str(&text).unwrap()
}

/// The hand instance with a second UE sharing area 0 and an identical
/// request of its own.
pub fn hand_instance_two_requests() -> Instance {
    let mut inst = hand_instance();
    let ue = inst.ues[0].clone();
    inst.ues.push(UeSpec { ue: 1, ..ue });
    let mut r = inst.requests[0].clone();
    r.id = 1;
    r.ue = 1;
    inst.requests.push(r);
    inst
}
