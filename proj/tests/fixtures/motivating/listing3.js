import { get } from '@ember/object';
import CheckSessionRoute from '../../check-session-route';
function service(user) {
	return {
		...user,
		userToken: get('currentUser.accessKey'),
		userSecret:  get('currentUser.userSecret'),
	};
}
export default CheckSessionRoute.extend({
	currentUser: service(),
});
