import Drone from './drone';
const drones = {};
function update(droneUpdate) {
  return drones[droneUpdate.id] = new Drone(droneUpdate, 10);
}
export default update;
