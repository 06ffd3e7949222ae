// 3D scene graph of the surgical setup, built from the static scene
// summary and updated from snapshots only. The helpers that derive world
// geometry from snapshot fields are pure and covered by tests; the THREE
// wiring itself needs a browser.

import * as THREE from "three";

import { applyPose, composePose, Mat3, PoseMm, poseFromMm, Vec3 } from "./math3.js";
import { ObbSummary, SceneSummary, Snapshot } from "./protocol.js";
import { collidingPairs, forceArrowMm } from "./state.js";

export function ringPoseFromSnapshot(snap: Snapshot): PoseMm {
  return poseFromMm(
    [snap.rsr_a_px, snap.rsr_a_py, snap.rsr_a_pz],
    [snap.rsr_a_qa, snap.rsr_a_qb, snap.rsr_a_qg],
  );
}

export function targetPoseFromSnapshot(snap: Snapshot): PoseMm {
  return poseFromMm(
    [snap.rsr_t_px, snap.rsr_t_py, snap.rsr_t_pz],
    [snap.rsr_t_qa, snap.rsr_t_qb, snap.rsr_t_qg],
  );
}

/** Leg endpoints in world mm: fixed anchor to the ring-borne anchor. */
export function legEndpoints(
  scene: SceneSummary,
  ringPose: PoseMm,
): { from: Vec3; to: Vec3 }[] {
  return scene.follower.fixed_anchors_mm.map((anchor, i) => {
    const moving = scene.follower.moving_anchors_mm[i];
    return {
      from: [anchor[0], anchor[1], anchor[2]] as Vec3,
      to: applyPose(ringPose, [moving[0], moving[1], moving[2]]),
    };
  });
}

export function distalBoxPose(box: ObbSummary, ringPose: PoseMm): PoseMm {
  return composePose(ringPose, poseFromMm(box.center_mm, box.euler_deg));
}

function matToThree(m: Mat3): THREE.Matrix4 {
  const t = new THREE.Matrix4();
  t.set(m[0][0], m[0][1], m[0][2], 0, m[1][0], m[1][1], m[1][2], 0,
        m[2][0], m[2][1], m[2][2], 0, 0, 0, 0, 1);
  return t;
}

function applyPoseToObject(obj: THREE.Object3D, pose: PoseMm): void {
  obj.position.set(pose.positionMm[0], pose.positionMm[1], pose.positionMm[2]);
  obj.quaternion.setFromRotationMatrix(matToThree(pose.rotation));
}

const BONE_COLOR = 0xd9cfc0;
const HIT_COLOR = 0xe05545;
const RING_COLOR = 0x8899aa;

export class SceneView {
  readonly root = new THREE.Scene();
  private movingRing: THREE.Mesh;
  private legs: THREE.Line[] = [];
  private distalMeshes: THREE.Mesh[] = [];
  private proximalMeshes: THREE.Mesh[] = [];
  private forceArrow: THREE.ArrowHelper;
  private scene: SceneSummary;

  constructor(scene: SceneSummary) {
    this.scene = scene;
    this.root.background = new THREE.Color(0x10151c);
    this.root.add(new THREE.AmbientLight(0xffffff, 0.7));
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(200, -300, 400);
    this.root.add(key);

    const fixedRadius = Math.hypot(
      scene.follower.fixed_anchors_mm[0][0],
      scene.follower.fixed_anchors_mm[0][1],
    );
    const movingRadius = Math.hypot(
      scene.follower.moving_anchors_mm[0][0],
      scene.follower.moving_anchors_mm[0][1],
    );
    const ringMaterial = new THREE.MeshStandardMaterial({ color: RING_COLOR });
    const fixedRing = new THREE.Mesh(
      new THREE.TorusGeometry(fixedRadius, 6, 12, 64),
      ringMaterial,
    );
    this.root.add(fixedRing);
    this.movingRing = new THREE.Mesh(
      new THREE.TorusGeometry(movingRadius, 5, 12, 64),
      ringMaterial.clone(),
    );
    this.root.add(this.movingRing);

    for (let i = 0; i < 3; i++) {
      const geometry = new THREE.BufferGeometry().setFromPoints([
        new THREE.Vector3(),
        new THREE.Vector3(),
      ]);
      const leg = new THREE.Line(
        geometry,
        new THREE.LineBasicMaterial({ color: 0x4fc3f7 }),
      );
      this.legs.push(leg);
      this.root.add(leg);
    }

    for (const box of scene.proximal_obbs) {
      const mesh = this.boxMesh(box);
      applyPoseToObject(mesh, poseFromMm(box.center_mm, box.euler_deg));
      this.proximalMeshes.push(mesh);
      this.root.add(mesh);
    }
    for (const box of scene.distal_templates) {
      const mesh = this.boxMesh(box);
      this.distalMeshes.push(mesh);
      this.root.add(mesh);
    }

    this.forceArrow = new THREE.ArrowHelper(
      new THREE.Vector3(0, 0, 1),
      new THREE.Vector3(),
      0,
      HIT_COLOR,
    );
    this.forceArrow.visible = false;
    this.root.add(this.forceArrow);
  }

  private boxMesh(box: ObbSummary): THREE.Mesh {
    const [hx, hy, hz] = box.half_extents_mm;
    return new THREE.Mesh(
      new THREE.BoxGeometry(2 * hx, 2 * hy, 2 * hz),
      new THREE.MeshStandardMaterial({ color: BONE_COLOR }),
    );
  }

  update(snap: Snapshot): void {
    const ringPose = ringPoseFromSnapshot(snap);
    applyPoseToObject(this.movingRing, ringPose);

    for (const [i, seg] of legEndpoints(this.scene, ringPose).entries()) {
      const positions = this.legs[i].geometry.getAttribute("position") as THREE.BufferAttribute;
      positions.setXYZ(0, seg.from[0], seg.from[1], seg.from[2]);
      positions.setXYZ(1, seg.to[0], seg.to[1], seg.to[2]);
      positions.needsUpdate = true;
    }

    this.scene.distal_templates.forEach((box, i) => {
      applyPoseToObject(this.distalMeshes[i], distalBoxPose(box, ringPose));
    });

    // Highlight colliding pairs (bit i: distal-major, proximal-minor order).
    const hits = collidingPairs(snap);
    const proximalHit = new Set(hits.map((i) => i % this.scene.proximal_obbs.length));
    const distalHit = new Set(hits.map((i) => Math.floor(i / this.scene.proximal_obbs.length)));
    this.proximalMeshes.forEach((mesh, i) => {
      (mesh.material as THREE.MeshStandardMaterial).color.set(
        proximalHit.has(i) ? HIT_COLOR : BONE_COLOR,
      );
    });
    this.distalMeshes.forEach((mesh, i) => {
      (mesh.material as THREE.MeshStandardMaterial).color.set(
        distalHit.has(i) ? HIT_COLOR : BONE_COLOR,
      );
    });

    const arrow = forceArrowMm([snap.fgx, snap.fgy, snap.fgz]);
    if (arrow.lengthMm > 0.5) {
      this.forceArrow.visible = true;
      this.forceArrow.position.set(...ringPose.positionMm);
      this.forceArrow.setDirection(new THREE.Vector3(...arrow.dir));
      this.forceArrow.setLength(arrow.lengthMm, 8, 4);
    } else {
      this.forceArrow.visible = false;
    }
  }
}

export function makeCamera(aspect: number): THREE.PerspectiveCamera {
  const camera = new THREE.PerspectiveCamera(40, aspect, 1, 5000);
  // Front view: looking along +y at the ring column, z up.
  camera.up.set(0, 0, 1);
  camera.position.set(60, -700, 260);
  camera.lookAt(0, 0, 260);
  return camera;
}
