//! Reference projections computed with PROJ (`oracles/geodesy_reference.py`).
#![allow(dead_code)]

pub const FORWARD: &[(u32, f64, f64, f64, f64)] = &[
    (32634, 37.9, 23.6, 728602.111673377, 4197907.330025521),
    (32634, 38.05, 22.9, 666709.0141940005, 4213066.674924058),
    (32634, 60.0, 25.5, 750870.4511997069, 6659949.573583083),
    (32634, 10.0, 18.0, 171071.26394131337, 1106908.8542431423),
    (32634, 75.0, 27.0, 673068.2659245592, 8332368.9524785625),
    (32634, 83.5, 15.0, 424303.90337268024, 9276217.526750611),
    (32734, -33.9, 18.4, 259583.22166043136, 6245888.045440769),
    (32733, -45.0, 12.25, 283257.8239283768, 5013370.206081077),
    (32601, 51.5, -177.0, 500000.0, 5705429.166769802),
    (32660, -10.0, 176.0, 390399.22748554696, -1105578.5891923993),
];

pub const INVERSE: &[(u32, f64, f64, f64, f64)] = &[
    (32634, 745000.0, 4200000.0, 37.91457327826098, 23.787015860351453),
    (32634, 250000.0, 6500000.0, 58.568360429974085, 16.70038796870217),
    (32735, 400000.0, 7000000.0, -27.118845826337047, 25.991057638075027),
    (32610, 512345.678, 4100000.0, 37.04614124361694, -122.861163304984),
    (32634, 500000.0, 9300000.0, 83.7483453571941, 20.999999999999993),
];

pub const ZONE_34_TO_35: &[(f64, f64, f64, f64)] = &[
    (745000.0, 4200000.0, 217545.08685909666, 4201206.207704542),
    (730000.0, 4180000.0, 201286.11849002878, 4182204.1644556844),
    (800000.0, 4300000.0, 278918.2237619688, 4297408.4550544135),
    (690000.0, 4150000.0, 159420.8099142016, 4154802.0661712107),
    (760000.0, 4195000.0, 232194.66212264867, 4195251.086697616),
];
